#include "sdbm/constructor.hpp"

#include <cmath>
#include <stdexcept>

namespace sdbm {

SoftDeepParams soft_deep_params(int depth) {
    if (depth < 0) throw std::invalid_argument("depth must be >= 0");
    SoftDeepParams p;
    p.depth = depth;
    p.w.resize(depth + 1);
    for (int k = 0; k <= depth; ++k) p.w[k].assign(k, 0.0);
    p.b.assign(depth + 1, 0.0);
    // recursion: append unit L with x = 2^{L-1}
    for (int L = 1; L <= depth; ++L) {
        const double x = std::ldexp(1.0, L - 1);
        p.w[L][0] = x;
        p.b[L] = 0.5 * x * (1.0 - x);
        for (int l = 1; l < L; ++l) p.w[L][l] = -x * p.w[l][0];
    }
    return p;
}

Model gbm_model(const SoftDeepParams& params) {
    const int L = params.depth;
    NetworkSpec spec = NetworkSpec::sdbm(std::vector<int>(L + 1, 1));
    if (L == 0) {
        // no hidden layer: not representable; keep a single zero-coupled unit
        throw std::invalid_argument("gbm_model requires depth >= 1");
    }
    Parameters p = Parameters::zeros(spec);
    for (std::size_t q = 0; q < spec.mask.size(); ++q) {
        auto [k, l] = spec.mask[q];
        p.weights[q](0, 0) = params.w[k][l];
    }
    for (int k = 0; k <= L; ++k) p.biases[k][0] = params.b[k];
    return Model(std::move(spec), std::move(p));
}

Model gbm_model(int depth) { return gbm_model(soft_deep_params(depth)); }

TangencyCertificate tangency_check(const SoftDeepParams& params, int depth, double tol) {
    if (depth > params.depth)
        throw std::invalid_argument("certificate depth exceeds constructed depth");
    const auto f = [](double x) { return -0.5 * (x * (x + 1.0) + 0.25); };
    TangencyCertificate cert;
    for (std::uint64_t config = 0; config < (std::uint64_t{1} << depth); ++config) {
        TangencyCertificate::Entry e;
        e.config = config;
        // E(v, x^{1:L}) = slope * v + intercept
        double slope = 0.0, intercept = 0.0, xi = 0.0;
        for (int k = 1; k <= depth; ++k) {
            const double xk = static_cast<double>((config >> (k - 1)) & 1u);
            slope -= xk * params.w[k][0];
            intercept -= xk * params.b[k];
            xi += xk * std::ldexp(1.0, k - 1);
            for (int l = 1; l < k; ++l) {
                const double xl = static_cast<double>((config >> (l - 1)) & 1u);
                intercept -= xk * params.w[k][l] * xl;
            }
        }
        slope -= params.b[0];  // b^0 is zero for the construction; kept for generality
        xi -= 0.5;
        e.slope = slope;
        e.intercept = intercept;
        e.tangency_point = xi;
        e.residual = std::abs(slope * xi + intercept - f(xi));
        // slope must match f'(xi) = -(xi + 0.5)
        const double slope_err = std::abs(slope + xi + 0.5);
        // line above f everywhere iff the quadratic difference
        // (line - f)(x) = 0.5 x^2 + (slope + 0.5) x + (intercept + 0.125)
        // has non-positive discriminant
        const double bq = slope + 0.5;
        const double disc = bq * bq - 2.0 * (intercept + 0.125);
        e.above = disc <= tol;
        for (int s = 0; s <= 1000 && e.above; ++s) {
            const double x = -1.0 + (std::ldexp(1.0, depth) + 1.0) * s / 1000.0;
            if (slope * x + intercept < f(x) - tol) e.above = false;
        }
        e.ok = e.residual <= tol && slope_err <= tol && e.above;
        cert.ok = cert.ok && e.ok;
        cert.entries.push_back(e);
    }
    return cert;
}

Model bundle_sdbm(int units_per_layer, int num_hidden_layers, const SoftDeepParams& base) {
    if (units_per_layer < 1) throw std::invalid_argument("bundle needs at least one unit per layer");
    if (num_hidden_layers < 1 || num_hidden_layers > base.depth)
        throw std::invalid_argument("bundle depth exceeds base chain depth");
    const int M = units_per_layer;
    const int L = num_hidden_layers;
    NetworkSpec spec = NetworkSpec::sdbm(std::vector<int>(L + 1, M));
    Parameters p = Parameters::zeros(spec);
    for (std::size_t q = 0; q < spec.mask.size(); ++q) {
        auto [k, l] = spec.mask[q];
        for (int j = 0; j < M; ++j) p.weights[q](j, j) = base.w[k][l];
    }
    for (int k = 0; k <= L; ++k) p.biases[k].setConstant(base.b[k]);
    return Model(std::move(spec), std::move(p));
}

Model bundle_sdbm(int units_per_layer, int num_hidden_layers) {
    return bundle_sdbm(units_per_layer, num_hidden_layers, soft_deep_params(num_hidden_layers));
}

Model rescale(const Model& model, double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw std::invalid_argument("rescale factor must be positive and finite");
    return model.rescaled(beta);
}

std::map<std::pair<int, int>, double> regularization_schedule(const NetworkSpec& spec,
                                                              double eta, double base_strength) {
    if (!(base_strength > 0.0)) throw std::invalid_argument("base strength must be positive");
    constexpr double kLog2 = 0.69314718055994530942;
    std::map<std::pair<int, int>, double> out;
    for (auto [k, l] : spec.mask) {
        // chain magnitude exponent: k-1 for (k,0), k+l-2 otherwise
        const int exponent = l == 0 ? k - 1 : k + l - 2;
        out[{k, l}] = std::exp(std::log(base_strength) - eta * exponent * kLog2);
    }
    return out;
}

}  // namespace sdbm
