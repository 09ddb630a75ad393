#include "sdbm/training.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "sdbm/constructor.hpp"
#include "sdbm/evaluation.hpp"
#include "sdbm/free_energy.hpp"
#include "sdbm/logsumexp.hpp"
#include "sdbm/threads.hpp"

namespace sdbm {

void TrainConfig::validate() const {
    if (!(initial_lr > 0.0)) throw std::invalid_argument("initial_lr must be positive");
    if (total_updates < 0) throw std::invalid_argument("total_updates must be >= 0");
    if (batch_size < 1 || pos_chain_steps < 1 || neg_chain_steps < 1)
        throw std::invalid_argument("counts must be >= 1");
    if (num_neg_chains < 0) throw std::invalid_argument("num_neg_chains must be >= 0");
    if (centering && !(centering->offset_update_rate > 0.0 &&
                       centering->offset_update_rate <= 1.0))
        throw std::invalid_argument("offset_update_rate must lie in (0,1]");
    if (reg && !(reg->base_strength > 0.0))
        throw std::invalid_argument("regularization base strength must be positive");
    if (momentum < 0.0 || momentum >= 1.0) throw std::invalid_argument("momentum must lie in [0,1)");
}

Gradient Gradient::zeros(const NetworkSpec& spec) {
    Gradient g;
    for (auto [k, l] : spec.mask)
        g.weights.push_back(Mat::Zero(spec.layer_sizes[k], spec.layer_sizes[l]));
    for (int n : spec.layer_sizes) g.biases.push_back(Vec::Zero(n));
    return g;
}

double Gradient::squared_norm() const {
    double s = 0.0;
    for (const Mat& w : weights) s += w.squaredNorm();
    for (const Vec& b : biases) s += b.squaredNorm();
    return s;
}

namespace {

LayerBatch random_batch(const NetworkSpec& spec, int cols, Rng& rng) {
    LayerBatch batch;
    for (int n : spec.layer_sizes) {
        Mat m(n, cols);
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                m(i, c) = rng.bernoulli(0.5) ? 1.0 : 0.0;
        batch.push_back(std::move(m));
    }
    return batch;
}

Mat centered(const Mat& states, const Parameters& params, int layer) {
    if (!params.has_offsets()) return states;
    return states.colwise() - params.offsets[layer];
}

}  // namespace

TrainState init_train_state(const Model& model, const Mat& train_examples,
                            const TrainConfig& config) {
    config.validate();
    if (train_examples.rows() != model.spec().num_visible())
        throw std::invalid_argument("training example row count mismatch");
    TrainState state;
    state.spec = model.spec();
    state.params = model.params();
    state.rng = Rng(config.seed);
    const int neg = config.num_neg_chains > 0 ? config.num_neg_chains : config.batch_size;
    state.neg_chains = random_batch(state.spec, neg, state.rng);
    state.pos_hidden = random_batch(state.spec, static_cast<int>(train_examples.cols()), state.rng);
    state.pos_hidden[0] = train_examples;
    return state;
}

Gradient sml_gradient(TrainState& state, const Mat& minibatch,
                      const std::vector<long>& minibatch_columns, const TrainConfig& config) {
    if (minibatch.cols() == 0) throw std::invalid_argument("empty minibatch");
    const Model model = state.model();
    const NetworkSpec& spec = state.spec;
    const int L = spec.depth();

    // positive phase: clamped chains warm-started per datapoint
    LayerBatch pos;
    pos.push_back(minibatch);
    for (int k = 1; k <= L; ++k) {
        Mat h(spec.layer_sizes[k], minibatch.cols());
        for (Eigen::Index c = 0; c < minibatch.cols(); ++c)
            h.col(c) = state.pos_hidden[k].col(minibatch_columns[c]);
        pos.push_back(std::move(h));
    }
    for (int s = 0; s < config.pos_chain_steps; ++s)
        gibbs_sweep_batch(model, pos, state.rng, /*clamp_visible=*/true);
    for (int k = 1; k <= L; ++k)
        for (Eigen::Index c = 0; c < minibatch.cols(); ++c)
            state.pos_hidden[k].col(minibatch_columns[c]) = pos[k].col(c);

    // negative phase: persistent free chains
    for (int s = 0; s < config.neg_chain_steps; ++s)
        gibbs_sweep_batch(model, state.neg_chains, state.rng);

    Gradient g = Gradient::zeros(spec);
    const double inv_pos = 1.0 / static_cast<double>(minibatch.cols());
    const double inv_neg = 1.0 / static_cast<double>(state.neg_chains[0].cols());
    for (std::size_t p = 0; p < spec.mask.size(); ++p) {
        auto [k, l] = spec.mask[p];
        g.weights[p] =
            inv_pos * centered(pos[k], state.params, k) *
                centered(pos[l], state.params, l).transpose() -
            inv_neg * centered(state.neg_chains[k], state.params, k) *
                centered(state.neg_chains[l], state.params, l).transpose();
    }
    for (int k = 0; k <= L; ++k)
        g.biases[k] = inv_pos * pos[k].rowwise().sum() -
                      inv_neg * state.neg_chains[k].rowwise().sum();

    if (config.reg) {
        const auto schedule =
            regularization_schedule(spec, config.reg->eta, config.reg->base_strength);
        for (std::size_t p = 0; p < spec.mask.size(); ++p)
            g.weights[p] -= 2.0 * schedule.at(spec.mask[p]) * state.params.weights[p];
    }
    return g;
}

namespace {

// Accumulates centered sufficient statistics weighted by a distribution.
struct Stats {
    std::vector<Mat> pair_moments;
    std::vector<Vec> unit_means;

    static Stats zeros(const NetworkSpec& spec) {
        Stats s;
        for (auto [k, l] : spec.mask)
            s.pair_moments.push_back(Mat::Zero(spec.layer_sizes[k], spec.layer_sizes[l]));
        for (int n : spec.layer_sizes) s.unit_means.push_back(Vec::Zero(n));
        return s;
    }

    void accumulate(const NetworkSpec& spec, const Parameters& params, const LayerState& x,
                    double weight) {
        for (std::size_t p = 0; p < spec.mask.size(); ++p) {
            auto [k, l] = spec.mask[p];
            if (params.has_offsets())
                pair_moments[p] += weight * (x[k] - params.offsets[k]) *
                                   (x[l] - params.offsets[l]).transpose();
            else
                pair_moments[p] += weight * x[k] * x[l].transpose();
        }
        for (std::size_t k = 0; k < unit_means.size(); ++k) unit_means[k] += weight * x[k];
    }
};

Stats posterior_stats(const Model& model, const Vec& v) {
    const NetworkSpec& spec = model.spec();
    const std::uint64_t n = num_hidden_configs(spec);
    LayerState state = model.zero_state();
    state[0] = v;
    LogSumExpAcc lse;
    std::vector<double> neg_energy(n);
    for (std::uint64_t h = 0; h < n; ++h) {
        hidden_from_index(spec, h, state);
        neg_energy[h] = -model.energy(state);
        lse.add(neg_energy[h]);
    }
    const double log_z = lse.value();
    Stats stats = Stats::zeros(spec);
    for (std::uint64_t h = 0; h < n; ++h) {
        hidden_from_index(spec, h, state);
        stats.accumulate(spec, model.params(), state, std::exp(neg_energy[h] - log_z));
    }
    return stats;
}

Stats model_stats(const Model& model) {
    const NetworkSpec& spec = model.spec();
    if (spec.num_units() > 25) throw std::invalid_argument("model too large for exact statistics");
    const std::uint64_t n = std::uint64_t{1} << spec.num_units();
    LayerState state = model.zero_state();
    const auto decode = [&](std::uint64_t index) {
        int bit = 0;
        for (int k = 0; k <= spec.depth(); ++k)
            for (int i = 0; i < spec.layer_sizes[k]; ++i, ++bit)
                state[k][i] = static_cast<double>((index >> bit) & 1u);
    };
    LogSumExpAcc lse;
    std::vector<double> neg_energy(n);
    for (std::uint64_t s = 0; s < n; ++s) {
        decode(s);
        neg_energy[s] = -model.energy(state);
        lse.add(neg_energy[s]);
    }
    const double log_z = lse.value();
    Stats stats = Stats::zeros(spec);
    for (std::uint64_t s = 0; s < n; ++s) {
        decode(s);
        stats.accumulate(spec, model.params(), state, std::exp(neg_energy[s] - log_z));
    }
    return stats;
}

}  // namespace

Gradient exact_gradient(const Model& model, const Mat& examples) {
    if (examples.cols() == 0) throw std::invalid_argument("empty example set");
    const NetworkSpec& spec = model.spec();
    Stats data = Stats::zeros(spec);
    const double inv = 1.0 / static_cast<double>(examples.cols());
    for (Eigen::Index e = 0; e < examples.cols(); ++e) {
        Stats s = posterior_stats(model, examples.col(e));
        for (std::size_t p = 0; p < spec.mask.size(); ++p)
            data.pair_moments[p] += inv * s.pair_moments[p];
        for (std::size_t k = 0; k < data.unit_means.size(); ++k)
            data.unit_means[k] += inv * s.unit_means[k];
    }
    const Stats mod = model_stats(model);
    Gradient g = Gradient::zeros(spec);
    for (std::size_t p = 0; p < spec.mask.size(); ++p)
        g.weights[p] = data.pair_moments[p] - mod.pair_moments[p];
    for (std::size_t k = 0; k < g.biases.size(); ++k)
        g.biases[k] = data.unit_means[k] - mod.unit_means[k];
    return g;
}

double exact_avg_log_likelihood(const Model& model, const Mat& examples) {
    const double log_z = exact_log_z(model);
    double mean_f = 0.0;
    for (Eigen::Index e = 0; e < examples.cols(); ++e)
        mean_f += exact_free_energy(model, examples.col(e));
    mean_f /= static_cast<double>(examples.cols());
    return -mean_f - log_z;
}

void update_offsets(TrainState& state, const Mat& minibatch,
                    const std::vector<long>& minibatch_columns, double rate) {
    if (!state.params.has_offsets()) {
        for (int n : state.spec.layer_sizes) state.params.offsets.push_back(Vec::Constant(n, 0.0));
    }
    const int L = state.spec.depth();
    for (int k = 0; k <= L; ++k) {
        Vec mean;
        if (k == 0) {
            mean = minibatch.rowwise().mean();
        } else {
            mean = Vec::Zero(state.spec.layer_sizes[k]);
            for (long c : minibatch_columns) mean += state.pos_hidden[k].col(c);
            mean /= static_cast<double>(minibatch_columns.size());
        }
        const Vec delta = rate * (mean - state.params.offsets[k]);
        // bias compensation keeps the distribution invariant under the shift
        for (std::size_t p = 0; p < state.spec.mask.size(); ++p) {
            auto [a, b] = state.spec.mask[p];
            if (a == k) state.params.biases[b] += state.params.weights[p].transpose() * delta;
            if (b == k) state.params.biases[a] += state.params.weights[p] * delta;
        }
        state.params.offsets[k] += delta;
    }
}

namespace {

double reconstruction_error(const Model& model, const Mat& minibatch, const LayerBatch& pos) {
    Mat in = model.layer_input_batch(0, pos);
    double err = 0.0;
    for (Eigen::Index c = 0; c < in.cols(); ++c)
        for (Eigen::Index i = 0; i < in.rows(); ++i) {
            const double d = sigmoid(in(i, c)) - minibatch(i, c);
            err += d * d;
        }
    return err / static_cast<double>(in.size());
}

}  // namespace

TrainResult train(const Model& init, const Mat& train_examples, const TrainConfig& config,
                  const Mat* test_examples) {
    config.validate();
    TrainState state = init_train_state(init, train_examples, config);
    if (config.centering && !state.params.has_offsets()) {
        // enable centering at the data means (hidden offsets start at 0.5)
        std::vector<long> all(train_examples.cols());
        for (long c = 0; c < static_cast<long>(all.size()); ++c) all[c] = c;
        for (int n : state.spec.layer_sizes) state.params.offsets.push_back(Vec::Constant(n, 0.5));
        for (int k = 0; k <= state.spec.depth(); ++k) state.params.offsets[k].setConstant(0.5);
        update_offsets(state, train_examples, all, 1.0);
        // hidden means are unknown at start; reset them to 0.5
        for (int k = 1; k <= state.spec.depth(); ++k) {
            const Vec delta = Vec::Constant(state.spec.layer_sizes[k], 0.5) -
                              state.params.offsets[k];
            for (std::size_t p = 0; p < state.spec.mask.size(); ++p) {
                auto [a, b] = state.spec.mask[p];
                if (a == k) state.params.biases[b] += state.params.weights[p].transpose() * delta;
                if (b == k) state.params.biases[a] += state.params.weights[p] * delta;
            }
            state.params.offsets[k] += delta;
        }
    }

    const long interval =
        config.log_interval > 0 ? config.log_interval : std::max(1L, config.total_updates / 20);
    const bool exact_ll = state.spec.num_units() <= config.exact_ll_cap;

    TrainResult result{state.model(), {}};
    Gradient velocity = Gradient::zeros(state.spec);
    double last_grad_norm = 0.0;
    double last_recon = 0.0;

    const auto log_now = [&](long t, double lr) {
        TrainLogEntry e;
        e.update = t;
        e.lr = lr;
        e.grad_norm = std::sqrt(last_grad_norm);
        e.reconstruction_error = last_recon;
        if (exact_ll) {
            const Model m = state.model();
            e.exact_train_ll = exact_avg_log_likelihood(m, train_examples);
            if (test_examples) e.exact_test_ll = exact_avg_log_likelihood(m, *test_examples);
        }
        result.log.push_back(std::move(e));
    };

    for (long t = 0; t < config.total_updates; ++t) {
        const double lr =
            config.initial_lr * (1.0 - static_cast<double>(t) / config.total_updates);
        std::vector<long> cols(config.batch_size);
        Mat minibatch(train_examples.rows(), config.batch_size);
        for (int c = 0; c < config.batch_size; ++c) {
            cols[c] = static_cast<long>(state.rng.next_u64() %
                                        static_cast<std::uint64_t>(train_examples.cols()));
            minibatch.col(c) = train_examples.col(cols[c]);
        }
        Gradient g = sml_gradient(state, minibatch, cols, config);
        last_grad_norm = g.squared_norm();
        if (config.momentum > 0.0) {
            for (std::size_t p = 0; p < g.weights.size(); ++p)
                velocity.weights[p] = config.momentum * velocity.weights[p] + g.weights[p];
            for (std::size_t k = 0; k < g.biases.size(); ++k)
                velocity.biases[k] = config.momentum * velocity.biases[k] + g.biases[k];
        }
        const Gradient& step = config.momentum > 0.0 ? velocity : g;
        for (std::size_t p = 0; p < step.weights.size(); ++p)
            state.params.weights[p] += lr * step.weights[p];
        for (std::size_t k = 0; k < step.biases.size(); ++k)
            state.params.biases[k] += lr * step.biases[k];
        if (config.centering)
            update_offsets(state, minibatch, cols, config.centering->offset_update_rate);

        for (const Mat& w : state.params.weights)
            if (!w.allFinite())
                throw std::runtime_error("non-finite parameter at update " + std::to_string(t));
        for (const Vec& b : state.params.biases)
            if (!b.allFinite())
                throw std::runtime_error("non-finite parameter at update " + std::to_string(t));

        {
            LayerBatch pos;
            pos.push_back(minibatch);
            for (int k = 1; k <= state.spec.depth(); ++k) {
                Mat h(state.spec.layer_sizes[k], config.batch_size);
                for (int c = 0; c < config.batch_size; ++c)
                    h.col(c) = state.pos_hidden[k].col(cols[c]);
                pos.push_back(std::move(h));
            }
            last_recon = reconstruction_error(state.model(), minibatch, pos);
        }

        state.update = t + 1;
        if ((t + 1) % interval == 0 || t + 1 == config.total_updates) log_now(t + 1, lr);
    }
    if (config.total_updates == 0) log_now(0, config.initial_lr);
    result.model = state.model();
    return result;
}

TrainConfig sample_hyperparams(const HyperRanges& ranges, std::uint64_t seed) {
    const auto check = [](const std::pair<double, double>& r) {
        if (r.first > r.second) throw std::invalid_argument("inverted hyperparameter interval");
    };
    check(ranges.log10_lr);
    check(ranges.log10_reg);
    check(ranges.eta);
    check(ranges.log10_offset_rate);
    Rng rng(seed);
    const auto log_uniform = [&](const std::pair<double, double>& r) {
        return std::pow(10.0, r.first + (r.second - r.first) * rng.uniform());
    };
    TrainConfig c;
    c.seed = seed;
    c.initial_lr = log_uniform(ranges.log10_lr);
    RegularizationConfig reg;
    reg.base_strength = log_uniform(ranges.log10_reg);
    reg.eta = ranges.eta.first + (ranges.eta.second - ranges.eta.first) * rng.uniform();
    c.reg = reg;
    CenteringConfig cen;
    cen.offset_update_rate = log_uniform(ranges.log10_offset_rate);
    c.centering = cen;
    return c;
}

std::string TrainLogEntry::to_json() const {
    nlohmann::json j;
    j["update"] = update;
    j["lr"] = lr;
    if (exact_train_ll) j["exact_train_ll"] = *exact_train_ll;
    if (exact_test_ll) j["exact_test_ll"] = *exact_test_ll;
    j["grad_norm"] = grad_norm;
    j["reconstruction_error"] = reconstruction_error;
    return j.dump();
}

}  // namespace sdbm
