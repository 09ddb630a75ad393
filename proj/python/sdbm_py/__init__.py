from ._core import (
    Model,
    NetworkSpec,
    ais_log_z,
    bars_and_stripes,
    bernoulli_baseline_ll,
    bundle_sdbm,
    check_bounds,
    count_effective_mixtures,
    exact_free_energy,
    exact_log_z,
    gbm_model,
    hardmin_free_energy,
    independent_bernoulli,
    meanfield_free_energy,
    parity_patterns,
    rbm_region_bound,
    set_num_threads,
    tangency_check,
    train,
)

__all__ = [
    "Model",
    "NetworkSpec",
    "ais_log_z",
    "bars_and_stripes",
    "bernoulli_baseline_ll",
    "bundle_sdbm",
    "check_bounds",
    "count_effective_mixtures",
    "exact_free_energy",
    "exact_log_z",
    "gbm_model",
    "hardmin_free_energy",
    "independent_bernoulli",
    "meanfield_free_energy",
    "parity_patterns",
    "rbm_region_bound",
    "set_num_threads",
    "tangency_check",
    "train",
]
