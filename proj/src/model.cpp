#include "sdbm/model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sdbm {

NetworkSpec NetworkSpec::rbm(int n_vis, int n_hid) {
    NetworkSpec spec;
    spec.layer_sizes = {n_vis, n_hid};
    spec.mask = {{1, 0}};
    spec.validate();
    return spec;
}

NetworkSpec NetworkSpec::dbm(const std::vector<int>& layer_sizes) {
    NetworkSpec spec;
    spec.layer_sizes = layer_sizes;
    for (int k = 1; k < static_cast<int>(layer_sizes.size()); ++k)
        spec.mask.emplace_back(k, k - 1);
    spec.validate();
    return spec;
}

NetworkSpec NetworkSpec::sdbm(const std::vector<int>& layer_sizes) {
    NetworkSpec spec;
    spec.layer_sizes = layer_sizes;
    for (int k = 1; k < static_cast<int>(layer_sizes.size()); ++k)
        for (int l = 0; l < k; ++l) spec.mask.emplace_back(k, l);
    spec.validate();
    return spec;
}

int NetworkSpec::num_hidden() const {
    return std::accumulate(layer_sizes.begin() + 1, layer_sizes.end(), 0);
}

int NetworkSpec::num_units() const {
    return std::accumulate(layer_sizes.begin(), layer_sizes.end(), 0);
}

int NetworkSpec::pair_index(int k, int l) const {
    for (int p = 0; p < static_cast<int>(mask.size()); ++p)
        if (mask[p].first == k && mask[p].second == l) return p;
    return -1;
}

Topology NetworkSpec::topology() const {
    const int L = depth();
    if (L == 1 && connected(1, 0)) return Topology::rbm;
    bool all_pairs = true, adjacent_only = true;
    for (int k = 1; k <= L; ++k) {
        for (int l = 0; l < k; ++l) {
            const bool c = connected(k, l);
            if (!c) all_pairs = false;
            if (c != (k - l == 1)) adjacent_only = false;
        }
    }
    if (all_pairs) return Topology::sdbm;
    if (adjacent_only) return Topology::dbm;
    return Topology::general;
}

void NetworkSpec::validate() const {
    if (layer_sizes.empty()) throw std::invalid_argument("layer_sizes must be non-empty");
    for (int n : layer_sizes)
        if (n < 1) throw std::invalid_argument("every layer size must be >= 1");
    const int L = depth();
    for (auto [k, l] : mask) {
        if (!(0 <= l && l < k && k <= L)) {
            std::ostringstream msg;
            msg << "invalid layer pair (" << k << "," << l << ") for depth " << L;
            throw std::invalid_argument(msg.str());
        }
    }
    for (std::size_t a = 0; a < mask.size(); ++a)
        for (std::size_t b = a + 1; b < mask.size(); ++b)
            if (mask[a] == mask[b]) throw std::invalid_argument("duplicate layer pair in mask");
}

Parameters Parameters::zeros(const NetworkSpec& spec) {
    Parameters p;
    for (auto [k, l] : spec.mask)
        p.weights.push_back(Mat::Zero(spec.layer_sizes[k], spec.layer_sizes[l]));
    for (int n : spec.layer_sizes) p.biases.push_back(Vec::Zero(n));
    return p;
}

Parameters Parameters::gaussian(const NetworkSpec& spec, double sigma, Rng& rng) {
    Parameters p = zeros(spec);
    for (auto& w : p.weights)
        for (Eigen::Index j = 0; j < w.cols(); ++j)
            for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = sigma * rng.normal();
    for (auto& b : p.biases)
        for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = sigma * rng.normal();
    return p;
}

namespace {

void validate_parameters(const NetworkSpec& spec, const Parameters& params) {
    if (params.weights.size() != spec.mask.size())
        throw std::invalid_argument("weight block count does not match mask");
    for (std::size_t p = 0; p < spec.mask.size(); ++p) {
        auto [k, l] = spec.mask[p];
        if (params.weights[p].rows() != spec.layer_sizes[k] ||
            params.weights[p].cols() != spec.layer_sizes[l])
            throw std::invalid_argument("weight block shape mismatch");
        if (!params.weights[p].allFinite())
            throw std::invalid_argument("non-finite weight entry");
    }
    if (params.biases.size() != spec.layer_sizes.size())
        throw std::invalid_argument("bias list count does not match layers");
    for (std::size_t k = 0; k < params.biases.size(); ++k) {
        if (params.biases[k].size() != spec.layer_sizes[k])
            throw std::invalid_argument("bias length mismatch");
        if (!params.biases[k].allFinite()) throw std::invalid_argument("non-finite bias entry");
    }
    if (!params.offsets.empty()) {
        if (params.offsets.size() != spec.layer_sizes.size())
            throw std::invalid_argument("offset list count does not match layers");
        for (std::size_t k = 0; k < params.offsets.size(); ++k) {
            if (params.offsets[k].size() != spec.layer_sizes[k])
                throw std::invalid_argument("offset length mismatch");
            if ((params.offsets[k].array() < 0.0).any() ||
                (params.offsets[k].array() > 1.0).any())
                throw std::invalid_argument("offsets must lie in [0,1]");
        }
    }
}

}  // namespace

Model::Model(NetworkSpec spec, Parameters params)
    : spec_(std::move(spec)), params_(std::move(params)) {
    spec_.validate();
    validate_parameters(spec_, params_);
}

Model Model::zeros(NetworkSpec spec) {
    Parameters p = Parameters::zeros(spec);
    return Model(std::move(spec), std::move(p));
}

Model Model::gaussian(NetworkSpec spec, double sigma, Rng& rng) {
    Parameters p = Parameters::gaussian(spec, sigma, rng);
    return Model(std::move(spec), std::move(p));
}

const Mat* Model::weight(int k, int l) const {
    const int p = spec_.pair_index(k, l);
    return p >= 0 ? &params_.weights[p] : nullptr;
}

Vec Model::offset(int k) const {
    if (params_.has_offsets()) return params_.offsets[k];
    return Vec::Zero(spec_.layer_sizes[k]);
}

double Model::energy(const LayerState& state) const {
    validate_state(spec_, state);
    double e = 0.0;
    const bool centered = params_.has_offsets();
    for (std::size_t p = 0; p < spec_.mask.size(); ++p) {
        auto [k, l] = spec_.mask[p];
        if (centered) {
            e -= (state[k] - params_.offsets[k]).dot(params_.weights[p] *
                                                     (state[l] - params_.offsets[l]));
        } else {
            e -= state[k].dot(params_.weights[p] * state[l]);
        }
    }
    for (std::size_t k = 0; k < params_.biases.size(); ++k) e -= params_.biases[k].dot(state[k]);
    return e;
}

Vec Model::layer_input(int k, const LayerState& state) const {
    if (k < 0 || k > spec_.depth()) throw std::invalid_argument("layer index out of range");
    const bool centered = params_.has_offsets();
    Vec in = params_.biases[k];
    for (std::size_t p = 0; p < spec_.mask.size(); ++p) {
        auto [a, b] = spec_.mask[p];
        if (a == k) {
            in += params_.weights[p] * (centered ? Vec(state[b] - params_.offsets[b]) : state[b]);
        } else if (b == k) {
            in += params_.weights[p].transpose() *
                  (centered ? Vec(state[a] - params_.offsets[a]) : state[a]);
        }
    }
    return in;
}

Vec Model::layer_conditional(int k, const LayerState& state) const {
    Vec in = layer_input(k, state);
    for (Eigen::Index i = 0; i < in.size(); ++i) in[i] = sigmoid(in[i]);
    return in;
}

Mat Model::layer_input_batch(int k, const LayerBatch& states) const {
    if (k < 0 || k > spec_.depth()) throw std::invalid_argument("layer index out of range");
    const bool centered = params_.has_offsets();
    Mat in = params_.biases[k].replicate(1, states[0].cols());
    for (std::size_t p = 0; p < spec_.mask.size(); ++p) {
        auto [a, b] = spec_.mask[p];
        if (a == k) {
            if (centered)
                in += params_.weights[p] * (states[b].colwise() - params_.offsets[b]);
            else
                in += params_.weights[p] * states[b];
        } else if (b == k) {
            if (centered)
                in += params_.weights[p].transpose() * (states[a].colwise() - params_.offsets[a]);
            else
                in += params_.weights[p].transpose() * states[a];
        }
    }
    return in;
}

Model Model::rescaled(double beta) const {
    if (!std::isfinite(beta)) throw std::invalid_argument("rescale factor must be finite");
    Parameters p = params_;
    for (auto& w : p.weights) w *= beta;
    for (auto& b : p.biases) b *= beta;
    return Model(spec_, std::move(p));
}

Model Model::uncentered_equivalent() const {
    if (!params_.has_offsets()) return *this;
    Parameters p = params_;
    for (std::size_t q = 0; q < spec_.mask.size(); ++q) {
        auto [k, l] = spec_.mask[q];
        p.biases[k] -= params_.weights[q] * params_.offsets[l];
        p.biases[l] -= params_.weights[q].transpose() * params_.offsets[k];
    }
    p.offsets.clear();
    return Model(spec_, std::move(p));
}

LayerState Model::zero_state() const {
    LayerState s;
    for (int n : spec_.layer_sizes) s.push_back(Vec::Zero(n));
    return s;
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

namespace {

std::vector<int> default_order(const NetworkSpec& spec, bool clamp_visible) {
    std::vector<int> order;
    for (int k = clamp_visible ? 1 : 0; k <= spec.depth(); ++k) order.push_back(k);
    return order;
}

}  // namespace

LayerState gibbs_sweep(const Model& model, LayerState state, Rng& rng, bool clamp_visible,
                       const std::vector<int>& order) {
    validate_state(model.spec(), state);
    const std::vector<int> sched =
        order.empty() ? default_order(model.spec(), clamp_visible) : order;
    for (int k : sched) {
        if (clamp_visible && k == 0) continue;
        Vec p = model.layer_conditional(k, state);
        for (Eigen::Index i = 0; i < p.size(); ++i)
            state[k][i] = rng.bernoulli(p[i]) ? 1.0 : 0.0;
    }
    return state;
}

void gibbs_sweep_batch(const Model& model, LayerBatch& states, Rng& rng, bool clamp_visible,
                       const std::vector<int>& order) {
    const std::vector<int> sched =
        order.empty() ? default_order(model.spec(), clamp_visible) : order;
    for (int k : sched) {
        if (clamp_visible && k == 0) continue;
        Mat in = model.layer_input_batch(k, states);
        for (Eigen::Index c = 0; c < in.cols(); ++c)
            for (Eigen::Index i = 0; i < in.rows(); ++i)
                states[k](i, c) = rng.bernoulli(sigmoid(in(i, c))) ? 1.0 : 0.0;
    }
}

std::vector<int> parity_order(const NetworkSpec& spec) {
    std::vector<int> order;
    for (int k = 0; k <= spec.depth(); k += 2) order.push_back(k);
    for (int k = 1; k <= spec.depth(); k += 2) order.push_back(k);
    return order;
}

std::uint64_t num_hidden_configs(const NetworkSpec& spec) {
    return std::uint64_t{1} << spec.num_hidden();
}

void hidden_from_index(const NetworkSpec& spec, std::uint64_t index, LayerState& state) {
    int bit = 0;
    for (int k = 1; k <= spec.depth(); ++k)
        for (int i = 0; i < spec.layer_sizes[k]; ++i, ++bit)
            state[k][i] = static_cast<double>((index >> bit) & 1u);
}

std::uint64_t hidden_to_index(const NetworkSpec& spec, const LayerState& state) {
    std::uint64_t index = 0;
    int bit = 0;
    for (int k = 1; k <= spec.depth(); ++k)
        for (int i = 0; i < spec.layer_sizes[k]; ++i, ++bit)
            if (state[k][i] > 0.5) index |= std::uint64_t{1} << bit;
    return index;
}

std::string config_bitstring(const NetworkSpec& spec, std::uint64_t index) {
    std::string s;
    for (int bit = 0; bit < spec.num_hidden(); ++bit)
        s.push_back(((index >> bit) & 1u) ? '1' : '0');
    return s;
}

void validate_state(const NetworkSpec& spec, const LayerState& state) {
    if (state.size() != spec.layer_sizes.size())
        throw std::invalid_argument("state layer count mismatch");
    for (std::size_t k = 0; k < state.size(); ++k)
        if (state[k].size() != spec.layer_sizes[k])
            throw std::invalid_argument("state layer length mismatch");
}

}  // namespace sdbm
