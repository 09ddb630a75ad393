#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "sdbm/model.hpp"

namespace sdbm {

// log Z by exact enumeration; for RBM topologies the smaller layer is
// enumerated with the closed-form sum over the other. cap limits the total
// number of energy-scale evaluations.
double exact_log_z(const Model& model, long long cap_evaluations = 1LL << 25);

struct AnnealingSchedule {
    std::vector<double> betas;  // 0 = beta_0 < ... < beta_last = 1
    int num_runs = 100;

    static AnnealingSchedule uniform(int num_betas, int num_runs);
    void validate() const;
};

struct AISResult {
    double log_z = 0.0;
    std::vector<double> log_weights;          // per run, log Z_A excluded
    std::pair<double, double> ci3{0.0, 0.0};  // 3 sigma interval in nats
    double base_log_z = 0.0;
    int num_betas = 0;
    int num_runs = 0;
};

// Geometric-path AIS from a zero-weight base model. base_visible_bias, when
// given, sets the base's visible biases (e.g. logit of data means); hidden
// biases of the base are zero either way.
AISResult ais_log_z(const Model& model, const AnnealingSchedule& schedule, std::uint64_t seed,
                    const Vec* base_visible_bias = nullptr);

enum class LikelihoodMode { exact_f, meanfield_bound };

struct LikelihoodReport {
    double mean = 0.0;
    std::pair<double, double> ci3{0.0, 0.0};
    std::vector<double> per_example;
};

// Per example -F(v) - log Z (exact mode) or -F_MF(v) - log Z (bound mode).
LikelihoodReport test_log_likelihood(const Model& model, const Mat& examples, double log_z,
                                     LikelihoodMode mode);

}  // namespace sdbm
