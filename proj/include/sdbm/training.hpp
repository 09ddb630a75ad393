#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdbm/model.hpp"

namespace sdbm {

struct RegularizationConfig {
    double eta = 1.0;
    double base_strength = 1e-5;
};

struct CenteringConfig {
    double offset_update_rate = 1e-3;  // in (0, 1]
};

struct TrainConfig {
    double initial_lr = 0.01;
    long total_updates = 10000;
    int batch_size = 100;
    int pos_chain_steps = 5;
    int neg_chain_steps = 5;
    int num_neg_chains = 0;  // 0 = batch_size
    std::optional<RegularizationConfig> reg;
    std::optional<CenteringConfig> centering;
    double momentum = 0.0;
    std::uint64_t seed = 0;
    long log_interval = 0;   // 0 = total_updates / 20
    int exact_ll_cap = 20;   // log exact LL only when total units fit

    void validate() const;
};

// Parameter-shaped gradient (ascent direction on the log-likelihood).
struct Gradient {
    std::vector<Mat> weights;
    std::vector<Vec> biases;

    static Gradient zeros(const NetworkSpec& spec);
    double squared_norm() const;
};

// Mutable training state: parameters, persistent negative chains, per-
// datapoint positive hidden chains, centering offsets, rng.
struct TrainState {
    NetworkSpec spec;
    Parameters params;
    LayerBatch neg_chains;                  // num_neg_chains columns
    LayerBatch pos_hidden;                  // one column per training example
    long update = 0;
    Rng rng{0};

    Model model() const { return Model(spec, params); }
};

TrainState init_train_state(const Model& model, const Mat& train_examples,
                            const TrainConfig& config);

// One SML gradient: positive statistics from clamped Gibbs chains warm-
// started from the persisted hidden states of the minibatch columns,
// negative statistics from the persistent free chains. Centered statistics
// when offsets are present; L2 decay per the soft-deep schedule when reg
// is configured.
Gradient sml_gradient(TrainState& state, const Mat& minibatch,
                      const std::vector<long>& minibatch_columns, const TrainConfig& config);

// Exact-expectation gradient by enumeration (posterior per data column,
// full Boltzmann model expectation). Matches d/dtheta of the exact average
// log-likelihood for the centered parameterization.
Gradient exact_gradient(const Model& model, const Mat& examples);

double exact_avg_log_likelihood(const Model& model, const Mat& examples);

// mu <- (1 - rho) mu + rho (batch means); biases compensated so the joint
// distribution is unchanged by the reparameterization.
void update_offsets(TrainState& state, const Mat& minibatch,
                    const std::vector<long>& minibatch_columns, double rate);

struct TrainLogEntry {
    long update = 0;
    double lr = 0.0;
    std::optional<double> exact_train_ll;
    std::optional<double> exact_test_ll;
    double grad_norm = 0.0;
    double reconstruction_error = 0.0;

    std::string to_json() const;
};

struct TrainResult {
    Model model;
    std::vector<TrainLogEntry> log;
};

// SML with linear learning-rate decay lr_t = initial_lr (1 - t / total).
// Bit-reproducible from config.seed.
TrainResult train(const Model& init, const Mat& train_examples, const TrainConfig& config,
                  const Mat* test_examples = nullptr);

struct HyperRanges {
    std::pair<double, double> log10_lr{-4.0, -2.0};
    std::pair<double, double> log10_reg{-7.0, -4.0};
    std::pair<double, double> eta{0.5, 3.5};                 // linear, not log
    std::pair<double, double> log10_offset_rate{-8.0, -5.0};
};

// Log-uniform (linear for eta) hyperparameter draw.
TrainConfig sample_hyperparams(const HyperRanges& ranges, std::uint64_t seed);

}  // namespace sdbm
