#include "sdbm/evaluation.hpp"

#include <cmath>
#include <stdexcept>

#include "sdbm/free_energy.hpp"
#include "sdbm/logsumexp.hpp"
#include "sdbm/threads.hpp"

namespace sdbm {

namespace {

double log1pexp(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// Energy constant separating a centered model from its uncentered
// reparameterization: E_centered = E_uncentered + c.
double centering_constant(const Model& model) {
    if (!model.params().has_offsets()) return 0.0;
    return model.energy(model.zero_state());
}

// log Z of an RBM by enumerating one layer and summing the other in closed
// form. enumerate_layer is 0 (visible) or 1 (hidden).
double rbm_log_z_enumerated(const Model& m, int enumerate_layer) {
    const Mat& w = *m.weight(1, 0);
    const Vec& b_enum = m.bias(enumerate_layer);
    const Vec& b_other = m.bias(1 - enumerate_layer);
    const int n_enum = m.spec().layer_sizes[enumerate_layer];
    const int n_other = m.spec().layer_sizes[1 - enumerate_layer];
    const std::uint64_t n = std::uint64_t{1} << n_enum;
    const std::size_t chunk = 8192;
    std::vector<LogSumExpAcc> parts((n + chunk - 1) / chunk);
    parallel_chunks(n, chunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
        Vec x(n_enum);
        LogSumExpAcc acc;
        for (std::size_t s = begin; s < end; ++s) {
            for (int i = 0; i < n_enum; ++i) x[i] = static_cast<double>((s >> i) & 1u);
            const Vec in = (enumerate_layer == 0 ? Vec(w * x) : Vec(w.transpose() * x)) + b_other;
            double t = b_enum.dot(x);
            for (int i = 0; i < n_other; ++i) t += log1pexp(in[i]);
            acc.add(t);
        }
        parts[c] = acc;
    });
    LogSumExpAcc total;
    for (const auto& p : parts) total.merge(p);
    return total.value();
}

void global_state_from_index(const NetworkSpec& spec, std::uint64_t index, LayerState& state) {
    int bit = 0;
    for (int k = 0; k <= spec.depth(); ++k)
        for (int i = 0; i < spec.layer_sizes[k]; ++i, ++bit)
            state[k][i] = static_cast<double>((index >> bit) & 1u);
}

}  // namespace

double exact_log_z(const Model& model, long long cap_evaluations) {
    const NetworkSpec& spec = model.spec();
    if (spec.topology() == Topology::rbm) {
        const int side = spec.layer_sizes[0] <= spec.layer_sizes[1] ? 0 : 1;
        if ((1LL << spec.layer_sizes[side]) > cap_evaluations)
            throw std::invalid_argument("exact_log_z enumeration exceeds cap");
        const Model u = model.uncentered_equivalent();
        return rbm_log_z_enumerated(u, side) - centering_constant(model);
    }
    if (spec.num_units() >= 63 || (1LL << spec.num_units()) > cap_evaluations)
        throw std::invalid_argument("exact_log_z enumeration exceeds cap");
    const std::uint64_t n = std::uint64_t{1} << spec.num_units();
    const std::size_t chunk = 8192;
    std::vector<LogSumExpAcc> parts((n + chunk - 1) / chunk);
    parallel_chunks(n, chunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
        LayerState state = model.zero_state();
        LogSumExpAcc acc;
        for (std::size_t s = begin; s < end; ++s) {
            global_state_from_index(spec, s, state);
            acc.add(-model.energy(state));
        }
        parts[c] = acc;
    });
    LogSumExpAcc total;
    for (const auto& p : parts) total.merge(p);
    return total.value();
}

AnnealingSchedule AnnealingSchedule::uniform(int num_betas, int num_runs) {
    if (num_betas < 2) throw std::invalid_argument("schedule needs at least two betas");
    AnnealingSchedule s;
    s.num_runs = num_runs;
    s.betas.resize(num_betas);
    for (int i = 0; i < num_betas; ++i)
        s.betas[i] = static_cast<double>(i) / (num_betas - 1);
    return s;
}

void AnnealingSchedule::validate() const {
    if (betas.size() < 2 || betas.front() != 0.0 || betas.back() != 1.0)
        throw std::invalid_argument("betas must run from 0 to 1");
    for (std::size_t i = 1; i < betas.size(); ++i)
        if (!(betas[i] > betas[i - 1]))
            throw std::invalid_argument("betas must be strictly increasing");
    if (num_runs < 1) throw std::invalid_argument("at least one AIS run required");
}

AISResult ais_log_z(const Model& model, const AnnealingSchedule& schedule, std::uint64_t seed,
                    const Vec* base_visible_bias) {
    schedule.validate();
    const Model m = model.uncentered_equivalent();
    const double centering = centering_constant(model);
    const NetworkSpec& spec = m.spec();
    const int L = spec.depth();

    Vec base_bias_vis = base_visible_bias ? *base_visible_bias : Vec(Vec::Zero(spec.num_visible()));
    if (base_bias_vis.size() != spec.num_visible())
        throw std::invalid_argument("base visible bias length mismatch");

    double base_log_z = 0.0;
    for (Eigen::Index j = 0; j < base_bias_vis.size(); ++j) base_log_z += log1pexp(base_bias_vis[j]);
    base_log_z += spec.num_hidden() * std::log(2.0);

    const auto base_energy = [&](const LayerState& s) { return -base_bias_vis.dot(s[0]); };

    Rng root(seed);
    std::vector<double> log_weights(schedule.num_runs);
    std::vector<bool> failed(schedule.num_runs, false);

    parallel_for(static_cast<std::size_t>(schedule.num_runs), [&](std::size_t run) {
        Rng rng = root.split(run);
        LayerState state = m.zero_state();
        for (Eigen::Index j = 0; j < state[0].size(); ++j)
            state[0][j] = rng.bernoulli(sigmoid(base_bias_vis[j])) ? 1.0 : 0.0;
        for (int k = 1; k <= L; ++k)
            for (Eigen::Index i = 0; i < state[k].size(); ++i)
                state[k][i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
        double lw = 0.0;
        for (std::size_t t = 0; t + 1 < schedule.betas.size(); ++t) {
            const double beta = schedule.betas[t + 1];
            const double dbeta = beta - schedule.betas[t];
            lw += dbeta * (base_energy(state) - m.energy(state));
            // one full sweep at the next intermediate distribution
            for (int k = 0; k <= L; ++k) {
                const Vec coupling = m.layer_input(k, state) - m.bias(k);
                for (Eigen::Index i = 0; i < state[k].size(); ++i) {
                    double in = beta * (coupling[i] + m.bias(k)[i]);
                    if (k == 0) in += (1.0 - beta) * base_bias_vis[i];
                    state[k][i] = rng.bernoulli(sigmoid(in)) ? 1.0 : 0.0;
                }
            }
        }
        if (!std::isfinite(lw)) failed[run] = true;
        log_weights[run] = lw;
    });
    for (int run = 0; run < schedule.num_runs; ++run)
        if (failed[run]) throw std::runtime_error("non-finite AIS weight in run " + std::to_string(run));

    LogSumExpAcc acc;
    for (double lw : log_weights) acc.add(lw);
    const double log_mean_w = acc.value() - std::log(static_cast<double>(schedule.num_runs));

    // delta-method 3 sigma interval on log of the weight mean
    double mean_r = 0.0, var_r = 0.0;
    for (double lw : log_weights) mean_r += std::exp(lw - acc.max);
    mean_r /= schedule.num_runs;
    for (double lw : log_weights) {
        const double d = std::exp(lw - acc.max) - mean_r;
        var_r += d * d;
    }
    var_r /= std::max(1, schedule.num_runs - 1);
    const double se_log = std::sqrt(var_r / schedule.num_runs) / mean_r;

    AISResult res;
    res.base_log_z = base_log_z;
    res.log_weights = std::move(log_weights);
    res.log_z = log_mean_w + base_log_z - centering;
    res.ci3 = {res.log_z - 3.0 * se_log, res.log_z + 3.0 * se_log};
    res.num_betas = static_cast<int>(schedule.betas.size());
    res.num_runs = schedule.num_runs;
    return res;
}

LikelihoodReport test_log_likelihood(const Model& model, const Mat& examples, double log_z,
                                     LikelihoodMode mode) {
    if (examples.cols() == 0) throw std::invalid_argument("empty example set");
    LikelihoodReport rep;
    rep.per_example.resize(examples.cols());
    parallel_for(static_cast<std::size_t>(examples.cols()), [&](std::size_t e) {
        const Vec v = examples.col(static_cast<Eigen::Index>(e));
        const double f = mode == LikelihoodMode::exact_f
                             ? exact_free_energy(model, v)
                             : meanfield_free_energy(model, v).value;
        rep.per_example[e] = -f - log_z;
    });
    double mean = 0.0;
    for (double x : rep.per_example) mean += x;
    mean /= rep.per_example.size();
    double var = 0.0;
    for (double x : rep.per_example) var += (x - mean) * (x - mean);
    var /= std::max<std::size_t>(1, rep.per_example.size() - 1);
    const double se = std::sqrt(var / rep.per_example.size());
    rep.mean = mean;
    rep.ci3 = {mean - 3.0 * se, mean + 3.0 * se};
    return rep;
}

}  // namespace sdbm
