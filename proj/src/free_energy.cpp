#include "sdbm/free_energy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "sdbm/logsumexp.hpp"
#include "sdbm/mixtures.hpp"
#include "sdbm/threads.hpp"

namespace sdbm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kEnumChunk = 8192;

void require_cap(const NetworkSpec& spec, int cap) {
    if (spec.num_hidden() > cap)
        throw std::invalid_argument("hidden unit count exceeds enumeration cap");
}

// log sum over hidden configurations of exp(-E(v, H)), optionally skipping
// one configuration index.
double log_boltzmann_sum(const Model& model, const Vec& v, std::uint64_t skip_index,
                         bool skip) {
    const std::uint64_t n = num_hidden_configs(model.spec());
    const std::size_t num_chunks = (n + kEnumChunk - 1) / kEnumChunk;
    std::vector<LogSumExpAcc> parts(num_chunks);
    parallel_chunks(n, kEnumChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
        LayerState state = model.zero_state();
        state[0] = v;
        LogSumExpAcc acc;
        for (std::size_t h = begin; h < end; ++h) {
            if (skip && h == skip_index) continue;
            hidden_from_index(model.spec(), h, state);
            acc.add(-model.energy(state));
        }
        parts[c] = acc;
    });
    LogSumExpAcc total;
    for (const LogSumExpAcc& p : parts) total.merge(p);
    return total.value();
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

double exact_free_energy(const Model& model, const Vec& v, int hidden_cap) {
    require_cap(model.spec(), hidden_cap);
    return -log_boltzmann_sum(model, v, 0, false);
}

std::pair<double, std::uint64_t> hardmin_free_energy(const Model& model, const Vec& v,
                                                     int hidden_cap) {
    require_cap(model.spec(), hidden_cap);
    const std::uint64_t n = num_hidden_configs(model.spec());
    const std::size_t num_chunks = (n + kEnumChunk - 1) / kEnumChunk;
    std::vector<std::pair<double, std::uint64_t>> parts(num_chunks, {kInf, 0});
    parallel_chunks(n, kEnumChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
        LayerState state = model.zero_state();
        state[0] = v;
        double best = kInf;
        std::uint64_t best_h = begin;
        for (std::size_t h = begin; h < end; ++h) {
            hidden_from_index(model.spec(), h, state);
            const double e = model.energy(state);
            if (e < best) {
                best = e;
                best_h = h;
            }
        }
        parts[c] = {best, best_h};
    });
    double best = kInf;
    std::uint64_t best_h = 0;
    for (const auto& [e, h] : parts) {
        if (e < best) {  // strict: ties keep the smaller configuration index
            best = e;
            best_h = h;
        }
    }
    return {best, best_h};
}

MeanFieldResult meanfield_free_energy(const Model& model, const Vec& v,
                                      const MeanFieldConfig& config) {
    const int L = model.spec().depth();
    MeanFieldResult res;
    LayerState state = model.zero_state();
    state[0] = v;
    for (int k = 1; k <= L; ++k) state[k].setConstant(config.init);

    for (int it = 0; it < config.max_iters; ++it) {
        double delta = 0.0;
        for (int k = 1; k <= L; ++k) {
            Vec in = model.layer_input(k, state);
            for (Eigen::Index i = 0; i < in.size(); ++i) {
                const double mu = (1.0 - config.damping) * state[k][i] +
                                  config.damping * sigmoid(in[i]);
                delta = std::max(delta, std::abs(mu - state[k][i]));
                state[k][i] = mu;
            }
        }
        res.iterations = it + 1;
        if (delta < config.tol) {
            res.converged = true;
            break;
        }
    }

    double entropy = 0.0;
    for (int k = 1; k <= L; ++k)
        for (Eigen::Index i = 0; i < state[k].size(); ++i)
            entropy -= xlogx(state[k][i]) + xlogx(1.0 - state[k][i]);
    res.value = model.energy(state) - entropy;
    res.hidden_means.assign(state.begin(), state.end());
    return res;
}

double residual_energy(const Model& model, const Vec& v, int hidden_cap) {
    require_cap(model.spec(), hidden_cap);
    if (num_hidden_configs(model.spec()) < 2) return kInf;
    const auto [fhat, argmin] = hardmin_free_energy(model, v, hidden_cap);
    (void)fhat;
    return -log_boltzmann_sum(model, v, argmin, true);
}

FreeEnergyBundle check_bounds(const Model& model, const Vec& v, double slack, int hidden_cap) {
    FreeEnergyBundle b;
    b.v = v;
    b.exact = exact_free_energy(model, v, hidden_cap);
    const auto [fhat, argmin] = hardmin_free_energy(model, v, hidden_cap);
    b.hardmin = fhat;
    b.argmin_config = argmin;
    b.meanfield = meanfield_free_energy(model, v).value;
    b.residual = residual_energy(model, v, hidden_cap);
    const double lower = b.hardmin - std::exp(b.hardmin - b.residual);
    b.bounds_ok = lower <= b.exact + slack && b.exact <= b.meanfield + slack &&
                  b.meanfield <= b.hardmin + slack;
    return b;
}

double rbm_free_energy_closed_form(const Model& model, const Vec& v) {
    if (model.spec().topology() != Topology::rbm)
        throw std::invalid_argument("closed form requires RBM topology");
    const Model m = model.uncentered_equivalent();
    const Mat& w = *m.weight(1, 0);
    double f = -m.bias(0).dot(v);
    const Vec in = w * v + m.bias(1);
    for (Eigen::Index i = 0; i < in.size(); ++i) {
        // log(1 + exp(x)) without overflow
        f -= in[i] > 0.0 ? in[i] + std::log1p(std::exp(-in[i])) : std::log1p(std::exp(in[i]));
    }
    return f;
}

namespace {

void write_real(std::ostream& out, double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    out << buf;
}

}  // namespace

void export_envelope(const Model& model, const std::vector<EnvelopeAxis>& axes, const Vec& base,
                     std::ostream& out, std::ostream* members) {
    if (axes.empty() || axes.size() > 2)
        throw std::invalid_argument("export_envelope supports 1-D or 2-D slices");
    const auto family = affine_family(model);

    out << (axes.size() == 1 ? "v0" : "v0,v1") << ",F,F_hat,F_mf,lower_bound,argmin_config\n";

    auto emit_point = [&](const Vec& v) {
        const double f = exact_free_energy(model, v);
        const auto [fhat, argmin] = hardmin_free_energy(model, v);
        const double fmf = meanfield_free_energy(model, v).value;
        const double eres = residual_energy(model, v);
        const double lower = fhat - std::exp(fhat - eres);
        for (std::size_t a = 0; a < axes.size(); ++a) {
            write_real(out, v[axes[a].coordinate]);
            out << ",";
        }
        write_real(out, f);
        out << ",";
        write_real(out, fhat);
        out << ",";
        write_real(out, fmf);
        out << ",";
        write_real(out, lower);
        out << "," << argmin << "\n";
    };

    Vec v = base;
    if (axes.size() == 1) {
        const EnvelopeAxis& ax = axes[0];
        for (int i = 0; i < ax.resolution; ++i) {
            v[ax.coordinate] =
                ax.lo + (ax.hi - ax.lo) * static_cast<double>(i) / (ax.resolution - 1);
            emit_point(v);
        }
        if (members) {
            *members << "config,slope,intercept\n";
            for (const AffinePiece& p : family) {
                *members << p.config << ",";
                write_real(*members, p.gradient[axes[0].coordinate]);
                *members << ",";
                double c = p.intercept;
                // fold the fixed coordinates into the intercept
                for (Eigen::Index j = 0; j < base.size(); ++j)
                    if (j != axes[0].coordinate) c += p.gradient[j] * base[j];
                write_real(*members, c);
                *members << "\n";
            }
        }
    } else {
        for (int i = 0; i < axes[0].resolution; ++i) {
            v[axes[0].coordinate] = axes[0].lo + (axes[0].hi - axes[0].lo) *
                                                     static_cast<double>(i) /
                                                     (axes[0].resolution - 1);
            for (int j = 0; j < axes[1].resolution; ++j) {
                v[axes[1].coordinate] = axes[1].lo + (axes[1].hi - axes[1].lo) *
                                                         static_cast<double>(j) /
                                                         (axes[1].resolution - 1);
                emit_point(v);
            }
        }
    }
}

}  // namespace sdbm
