#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "sdbm/model.hpp"

namespace sdbm {

// Parameters of the recursive unit-per-layer chain construction:
// w^{k,0} = 2^{k-1}, b^k = 0.5 * 2^{k-1} (1 - 2^{k-1}),
// w^{k,l} = -2^{k-1} * 2^{l-1} for 1 <= l < k.
struct SoftDeepParams {
    int depth = 0;
    std::vector<std::vector<double>> w;  // w[k][l], 0 <= l < k <= depth
    std::vector<double> b;               // b[0..depth]

    double weight(int k, int l) const { return w[k][l]; }
};

SoftDeepParams soft_deep_params(int depth);

// Single-visible-unit chain model with full pair connectivity.
Model gbm_model(int depth);
Model gbm_model(const SoftDeepParams& params);

struct TangencyCertificate {
    struct Entry {
        std::uint64_t config = 0;
        double slope = 0.0;
        double intercept = 0.0;
        double tangency_point = 0.0;
        double residual = 0.0;  // |line(xi) - f(xi)|
        bool above = true;      // line lies weakly above f everywhere
        bool ok = true;
    };
    std::vector<Entry> entries;
    bool ok = true;
};

// Verifies every configuration's energy line is tangent to
// f(x) = -0.5 (x (x + 1) + 0.25) at xi = sum_k x^k 2^{k-1} - 0.5 and lies
// weakly above f, via sampled points plus the discriminant of the
// quadratic difference.
TangencyCertificate tangency_check(const SoftDeepParams& params, int depth, double tol = 1e-9);

// sDBM with L hidden layers of M units: unit j of every layer carries the
// chain weights against unit j elsewhere; cross-unit weights are zero but
// the mask stays full sDBM so training can later break independence.
Model bundle_sdbm(int units_per_layer, int num_hidden_layers);
Model bundle_sdbm(int units_per_layer, int num_hidden_layers, const SoftDeepParams& base);

Model rescale(const Model& model, double beta);

// Per-pair L2 strengths lambda^{k,l} = base / |w~^{k,l}|^eta with the
// chain magnitudes |w~^{k,0}| = 2^{k-1}, |w~^{k,l}| = 2^{k+l-2}; computed
// in log space so deep networks do not overflow.
std::map<std::pair<int, int>, double> regularization_schedule(const NetworkSpec& spec,
                                                              double eta, double base_strength);

}  // namespace sdbm
