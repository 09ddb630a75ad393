#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "sdbm/model.hpp"

namespace sdbm {

// 2^{N_hid} enumeration limit for exact free-energy computations.
inline constexpr int kDefaultHiddenCap = 25;

struct MeanFieldConfig {
    int max_iters = 10000;
    double damping = 0.5;
    double tol = 1e-10;
    double init = 0.5;
};

struct MeanFieldResult {
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<Vec> hidden_means;  // indexed 1..L; entry 0 unused
};

struct FreeEnergyBundle {
    Vec v;
    double exact = 0.0;
    double hardmin = 0.0;
    double meanfield = 0.0;
    double residual = 0.0;
    std::uint64_t argmin_config = 0;
    bool bounds_ok = false;
};

// -log sum_H exp(-E(v,H)), log-sum-exp stabilized. v may be real-valued.
double exact_free_energy(const Model& model, const Vec& v, int hidden_cap = kDefaultHiddenCap);

// min_H E(v,H); ties broken by smallest configuration index (all-zeros first).
std::pair<double, std::uint64_t> hardmin_free_energy(const Model& model, const Vec& v,
                                                     int hidden_cap = kDefaultHiddenCap);

MeanFieldResult meanfield_free_energy(const Model& model, const Vec& v,
                                      const MeanFieldConfig& config = {});

// -log of the Boltzmann sum with the single minimum-energy term removed;
// +infinity when only one hidden configuration exists.
double residual_energy(const Model& model, const Vec& v, int hidden_cap = kDefaultHiddenCap);

// Evaluates all four quantities and checks the bound chain
//   hardmin - exp(hardmin - residual) <= exact <= meanfield <= hardmin
// with the given slack.
FreeEnergyBundle check_bounds(const Model& model, const Vec& v, double slack = 1e-9,
                              int hidden_cap = kDefaultHiddenCap);

// Closed-form RBM free energy -b0.v - sum_i log(1 + exp(w_i.v + b1_i));
// cross-check oracle for exact_free_energy on RBM topologies.
double rbm_free_energy_closed_form(const Model& model, const Vec& v);

struct EnvelopeAxis {
    int coordinate = 0;          // which visible coordinate varies
    double lo = -1.0, hi = 4.0;
    int resolution = 500;
};

// Emits CSV rows {v..., F, F_hat, F_mf, lower_bound, argmin_config} over a
// 1-D or 2-D visible slice (remaining coordinates fixed to `base`). For the
// 1-D case also writes per-configuration affine member lines to `members`
// when given. Floats use 17 significant digits, LF line endings.
void export_envelope(const Model& model, const std::vector<EnvelopeAxis>& axes, const Vec& base,
                     std::ostream& out, std::ostream* members = nullptr);

}  // namespace sdbm
