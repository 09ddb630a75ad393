#include "sdbm/mixtures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "sdbm/free_energy.hpp"
#include "sdbm/lp.hpp"
#include "sdbm/threads.hpp"

namespace sdbm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

Domain Domain::box(Vec lo_, Vec hi_) {
    Domain d;
    d.lo = std::move(lo_);
    d.hi = std::move(hi_);
    if (d.lo->size() != d.hi->size()) throw std::invalid_argument("domain bound size mismatch");
    return d;
}

std::vector<AffinePiece> affine_family(const Model& model, int hidden_cap) {
    if (model.spec().num_hidden() > hidden_cap)
        throw std::invalid_argument("hidden unit count exceeds enumeration cap");
    const int n_vis = model.spec().num_visible();
    const std::uint64_t n = num_hidden_configs(model.spec());
    std::vector<AffinePiece> family(n);
    parallel_chunks(n, 4096, [&](std::size_t, std::size_t begin, std::size_t end) {
        LayerState state = model.zero_state();
        for (std::size_t h = begin; h < end; ++h) {
            hidden_from_index(model.spec(), h, state);
            state[0].setZero();
            AffinePiece piece;
            piece.config = h;
            piece.intercept = model.energy(state);
            // gradient of E(v, H) in v, formed directly from the blocks that
            // touch the visible layer: configs agreeing on those layers get
            // bitwise-identical gradients, so exact-equality reduction works
            Vec grad = -model.bias(0);
            for (std::size_t p = 0; p < model.spec().mask.size(); ++p) {
                auto [k, l] = model.spec().mask[p];
                if (l != 0) continue;
                const Vec xk = model.params().has_offsets()
                                   ? Vec(state[k] - model.params().offsets[k])
                                   : state[k];
                grad -= model.params().weights[p].transpose() * xk;
            }
            piece.gradient = std::move(grad);
            family[h] = std::move(piece);
        }
    });
    return family;
}

std::vector<AffinePiece> reduce_by_gradient(const std::vector<AffinePiece>& family,
                                            double near_tie_rtol,
                                            std::vector<std::uint64_t>* near_tie_flags) {
    std::map<std::vector<double>, AffinePiece> groups;
    for (const AffinePiece& p : family) {
        std::vector<double> key(p.gradient.data(), p.gradient.data() + p.gradient.size());
        auto it = groups.find(key);
        if (it == groups.end()) {
            groups.emplace(std::move(key), p);
        } else if (p.intercept < it->second.intercept) {
            it->second = p;
        }
        // equal intercept keeps the earlier (smaller) config: coincident
        // pieces count once
    }
    std::vector<AffinePiece> reduced;
    reduced.reserve(groups.size());
    for (auto& [key, p] : groups) reduced.push_back(p);
    std::sort(reduced.begin(), reduced.end(),
              [](const AffinePiece& a, const AffinePiece& b) { return a.config < b.config; });

    if (near_tie_flags && reduced.size() <= 4096) {
        for (std::size_t i = 0; i < reduced.size(); ++i) {
            for (std::size_t j = i + 1; j < reduced.size(); ++j) {
                const double diff =
                    (reduced[i].gradient - reduced[j].gradient).cwiseAbs().maxCoeff();
                const double scale = std::max(reduced[i].gradient.cwiseAbs().maxCoeff(),
                                              reduced[j].gradient.cwiseAbs().maxCoeff());
                if (diff > 0.0 && diff < near_tie_rtol * std::max(1.0, scale)) {
                    near_tie_flags->push_back(reduced[i].config);
                    near_tie_flags->push_back(reduced[j].config);
                }
            }
        }
    }
    return reduced;
}

RegionReport count_regions_1d(const std::vector<AffinePiece>& family, const Domain& domain) {
    if (family.empty()) throw std::invalid_argument("empty affine family");
    if (family.front().gradient.size() != 1)
        throw std::invalid_argument("count_regions_1d requires N_vis = 1");

    std::vector<AffinePiece> lines = reduce_by_gradient(family);
    // slope descending: envelope pieces appear in this order as v increases
    std::sort(lines.begin(), lines.end(), [](const AffinePiece& a, const AffinePiece& b) {
        return a.gradient[0] > b.gradient[0];
    });

    // hull sweep: drop lines that never strictly attain the minimum
    std::vector<AffinePiece> hull;
    for (const AffinePiece& l : lines) {
        while (hull.size() >= 2) {
            const AffinePiece& a = hull[hull.size() - 2];
            const AffinePiece& b = hull.back();
            // b is unnecessary iff cross(a, l) happens at or before cross(a, b)
            const double lhs = (l.intercept - a.intercept) * (a.gradient[0] - b.gradient[0]);
            const double rhs = (b.intercept - a.intercept) * (a.gradient[0] - l.gradient[0]);
            if (lhs <= rhs)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(l);
    }

    // breakpoints between consecutive hull lines
    std::vector<double> breaks;
    for (std::size_t i = 0; i + 1 < hull.size(); ++i)
        breaks.push_back((hull[i + 1].intercept - hull[i].intercept) /
                         (hull[i].gradient[0] - hull[i + 1].gradient[0]));

    const double lo = domain.bounded() ? (*domain.lo)[0] : -kInf;
    const double hi = domain.bounded() ? (*domain.hi)[0] : kInf;

    RegionReport report;
    report.method = "envelope-1d";
    report.exact = true;
    report.domain = domain;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const double left = std::max(i == 0 ? -kInf : breaks[i - 1], lo);
        const double right = std::min(i == hull.size() - 1 ? kInf : breaks[i], hi);
        if (!(left < right)) continue;
        ActiveRegion r;
        r.config = hull[i].config;
        r.gradient = hull[i].gradient;
        r.intercept = hull[i].intercept;
        double w;
        if (std::isfinite(left) && std::isfinite(right))
            w = 0.5 * (left + right);
        else if (std::isfinite(left))
            w = left + 1.0;
        else if (std::isfinite(right))
            w = right - 1.0;
        else
            w = 0.0;
        r.witness = Vec::Constant(1, w);
        report.active.push_back(std::move(r));
    }
    std::sort(report.active.begin(), report.active.end(),
              [](const ActiveRegion& a, const ActiveRegion& b) { return a.config < b.config; });
    report.count = static_cast<long long>(report.active.size());
    return report;
}

LpActivity is_active_lp(const std::vector<AffinePiece>& reduced, std::size_t index,
                        const Domain& domain, double eps, std::uint64_t seed) {
    if (index >= reduced.size()) throw std::invalid_argument("piece index out of range");
    const int d = static_cast<int>(reduced[index].gradient.size());
    LpActivity res;
    if (reduced.size() == 1) {
        res.active = true;
        res.witness = domain.bounded() ? Vec(0.5 * (*domain.lo + *domain.hi)) : Vec(Vec::Zero(d));
        res.margin = 1.0;
        return res;
    }

    if (domain.bounded()) {
        // maximize t s.t. (a* - a_j) . v + t <= C_j - C* for all j != index,
        // v inside the user-supplied box
        LpProblem lp;
        lp.c = Vec::Zero(d + 1);
        lp.c[d] = 1.0;
        lp.lo.resize(d + 1);
        lp.hi.resize(d + 1);
        lp.lo.head(d) = *domain.lo;
        lp.hi.head(d) = *domain.hi;
        double big = 1.0;
        for (const AffinePiece& p : reduced)
            big = std::max(big, std::abs(p.intercept - reduced[index].intercept));
        for (int j = 0; j < d; ++j) {
            const double r = std::max(std::abs((*domain.lo)[j]), std::abs((*domain.hi)[j]));
            double max_dg = 0.0;
            for (const AffinePiece& p : reduced)
                max_dg = std::max(max_dg, std::abs(reduced[index].gradient[j] - p.gradient[j]));
            big += r * max_dg;
        }
        lp.lo[d] = -2.0 * big - 1.0;
        lp.hi[d] = 1.0;
        for (std::size_t j = 0; j < reduced.size(); ++j) {
            if (j == index) continue;
            Vec a(d + 1);
            a.head(d) = reduced[index].gradient - reduced[j].gradient;
            a[d] = 1.0;
            lp.constraint_normals.push_back(std::move(a));
            lp.constraint_offsets.push_back(reduced[j].intercept - reduced[index].intercept);
        }
        const LpSolution sol = solve_lp(lp, seed ^ (reduced[index].config * 0x9e3779b9ULL));
        if (sol.status != LpSolution::Status::optimal)
            throw std::runtime_error("activity LP reported infeasible");
        res.margin = sol.value;
        res.active = sol.value > eps;
        res.witness = sol.x.head(d);
        return res;
    }

    // Full domain. The open region { v : (a* - a_j) . v < C_j - C* for all j }
    // is scale-invariant after homogenizing with s >= 0, so its emptiness is
    // decided exactly by
    //   maximize t  s.t.  (a* - a_j) . u + (C* - C_j) s + t <= 0,
    //                     u in [-1, 1]^d,  s in [0, 1],  t in [0, 1].
    // The region is nonempty iff the optimum t* is positive: s > 0 gives the
    // witness u / s, and s = 0 gives a direction of strict recession along
    // which every constraint eventually holds.
    LpProblem lp;
    lp.c = Vec::Zero(d + 2);
    lp.c[d + 1] = 1.0;
    lp.lo = Vec::Constant(d + 2, -1.0);
    lp.hi = Vec::Constant(d + 2, 1.0);
    lp.lo[d] = 0.0;
    lp.lo[d + 1] = 0.0;
    for (std::size_t j = 0; j < reduced.size(); ++j) {
        if (j == index) continue;
        Vec a(d + 2);
        a.head(d) = reduced[index].gradient - reduced[j].gradient;
        a[d] = reduced[index].intercept - reduced[j].intercept;
        a[d + 1] = 1.0;
        lp.constraint_normals.push_back(std::move(a));
        lp.constraint_offsets.push_back(0.0);
    }
    const LpSolution sol = solve_lp(lp, seed ^ (reduced[index].config * 0x9e3779b9ULL));
    if (sol.status != LpSolution::Status::optimal)
        throw std::runtime_error("activity LP reported infeasible");  // origin is feasible
    res.margin = sol.value;
    res.active = sol.value > eps;
    if (!res.active) {
        res.witness = Vec::Zero(d);
        return res;
    }
    const Vec u = sol.x.head(d);
    const double s = sol.x[d];
    const double t = sol.value;
    if (s > 1e-12) {
        res.witness = u / s;
    } else {
        // u is a recession direction with slope at most -t against every
        // competitor; walk far enough for the intercept differences to lose.
        double max_dc = 0.0;
        for (std::size_t j = 0; j < reduced.size(); ++j)
            if (j != index)
                max_dc = std::max(max_dc, std::abs(reduced[j].intercept - reduced[index].intercept));
        res.witness = (2.0 * (1.0 + max_dc) / t) * u;
    }
    return res;
}

namespace {

RegionReport count_lp_exact(const Model& model, const CountOptions& opt) {
    const auto family = affine_family(model);
    const auto reduced = reduce_by_gradient(family);
    if (static_cast<int>(reduced.size()) > opt.lp_family_cap)
        throw std::invalid_argument("reduced family exceeds lp-exact cap");
    RegionReport report;
    report.method = "lp-exact";
    report.exact = true;
    report.domain = opt.domain;
    std::vector<LpActivity> results(reduced.size());
    parallel_for(reduced.size(), [&](std::size_t i) {
        results[i] = is_active_lp(reduced, i, opt.domain, opt.eps, opt.seed);
    });
    for (std::size_t i = 0; i < reduced.size(); ++i) {
        if (!results[i].active) continue;
        ActiveRegion r;
        r.config = reduced[i].config;
        r.witness = results[i].witness;
        r.gradient = reduced[i].gradient;
        r.intercept = reduced[i].intercept;
        report.active.push_back(std::move(r));
    }
    report.count = static_cast<long long>(report.active.size());
    return report;
}

RegionReport count_grid_estimate(const Model& model, const CountOptions& opt) {
    const auto family = affine_family(model);
    const auto reduced = reduce_by_gradient(family);
    const int d = model.spec().num_visible();
    Vec lo(d), hi(d);
    if (opt.domain.bounded()) {
        lo = *opt.domain.lo;
        hi = *opt.domain.hi;
    } else {
        double max_c = 0.0;
        for (const AffinePiece& p : reduced) max_c = std::max(max_c, std::abs(p.intercept));
        const double r = 4.0 * (1.0 + max_c);
        lo.setConstant(-r);
        hi.setConstant(r);
    }
    std::map<std::uint64_t, std::pair<Vec, std::size_t>> seen;  // config -> witness, piece
    std::vector<int> idx(d, 0);
    Vec v(d);
    const long long total = [&] {
        long long t = 1;
        for (int j = 0; j < d; ++j) t *= opt.grid_resolution;
        return t;
    }();
    for (long long g = 0; g < total; ++g) {
        long long rem = g;
        for (int j = 0; j < d; ++j) {
            const int i = static_cast<int>(rem % opt.grid_resolution);
            rem /= opt.grid_resolution;
            v[j] = lo[j] + (hi[j] - lo[j]) * (i + 0.5) / opt.grid_resolution;
        }
        double best = kInf;
        std::size_t best_i = 0;
        for (std::size_t i = 0; i < reduced.size(); ++i) {
            const double e = reduced[i].gradient.dot(v) + reduced[i].intercept;
            if (e < best) {
                best = e;
                best_i = i;
            }
        }
        seen.emplace(reduced[best_i].config, std::make_pair(v, best_i));
    }
    RegionReport report;
    report.method = "grid-estimate";
    report.exact = false;
    report.domain = opt.domain;
    for (const auto& [config, wp] : seen) {
        ActiveRegion r;
        r.config = config;
        r.witness = wp.first;
        r.gradient = reduced[wp.second].gradient;
        r.intercept = reduced[wp.second].intercept;
        report.active.push_back(std::move(r));
    }
    report.count = static_cast<long long>(report.active.size());
    return report;
}

}  // namespace

RegionReport count_effective_mixtures(const Model& model, const CountOptions& options) {
    CountMethod method = options.method;
    if (method == CountMethod::automatic) {
        if (model.spec().num_visible() == 1) {
            method = CountMethod::envelope_1d;
        } else {
            method = CountMethod::lp_exact;
        }
    }
    switch (method) {
        case CountMethod::envelope_1d: {
            if (model.spec().num_visible() != 1)
                throw std::invalid_argument("envelope-1d requires a single visible unit");
            return count_regions_1d(affine_family(model), options.domain);
        }
        case CountMethod::lp_exact:
            return count_lp_exact(model, options);
        case CountMethod::grid_estimate:
            return count_grid_estimate(model, options);
        default:
            throw std::invalid_argument("unknown counting method");
    }
}

BigInt rbm_region_formula(int n_vis, int n_hid) {
    if (n_vis < 0 || n_hid < 0) throw std::invalid_argument("negative layer size");
    BigInt total = 0;
    BigInt binom = 1;  // C(n_hid, 0)
    for (int j = 0; j <= std::min(n_vis, n_hid); ++j) {
        total += binom;
        binom = binom * (n_hid - j) / (j + 1);
    }
    return total;
}

BoundReport bound_report(const Model& model, std::optional<long long> measured) {
    const NetworkSpec& spec = model.spec();
    BoundReport r;
    r.topology = spec.topology();
    r.lower_bound = 1;
    r.lower_label = "trivial";
    const BigInt config_count = BigInt(1) << spec.num_hidden();
    switch (r.topology) {
        case Topology::rbm:
            r.upper_bound = rbm_region_formula(spec.num_visible(), spec.num_hidden());
            r.upper_label = "maximal RBM region count (binomial sum)";
            break;
        case Topology::dbm:
            r.upper_bound = BigInt(1) << spec.layer_sizes[1];
            r.upper_label = "first-hidden-layer ceiling 2^{n1}";
            r.strictly_below_config_count = spec.layer_sizes[1] > spec.num_visible();
            break;
        default:
            r.upper_bound = config_count;
            r.upper_label = "hidden configuration count 2^{N_hid}";
            break;
    }
    r.measured = measured;
    if (measured) r.pass = *measured >= 1 && BigInt(*measured) <= r.upper_bound;
    return r;
}

std::string RegionReport::to_json(const NetworkSpec& spec) const {
    nlohmann::json j;
    j["count"] = count;
    j["method"] = method;
    j["exact"] = exact;
    if (domain.bounded()) {
        j["domain"]["lo"] = std::vector<double>(domain.lo->data(), domain.lo->data() + domain.lo->size());
        j["domain"]["hi"] = std::vector<double>(domain.hi->data(), domain.hi->data() + domain.hi->size());
    } else {
        j["domain"] = "R^N_vis";
    }
    j["active"] = nlohmann::json::array();
    for (const ActiveRegion& r : active) {
        nlohmann::json a;
        a["config"] = config_bitstring(spec, r.config);
        a["witness"] = std::vector<double>(r.witness.data(), r.witness.data() + r.witness.size());
        a["gradient"] =
            std::vector<double>(r.gradient.data(), r.gradient.data() + r.gradient.size());
        a["intercept"] = r.intercept;
        j["active"].push_back(std::move(a));
    }
    return j.dump(1);
}

std::string BoundReport::to_json() const {
    nlohmann::json j;
    switch (topology) {
        case Topology::rbm: j["topology"] = "rbm"; break;
        case Topology::dbm: j["topology"] = "dbm"; break;
        case Topology::sdbm: j["topology"] = "sdbm"; break;
        default: j["topology"] = "general"; break;
    }
    j["upper_bound"] = upper_bound.str();
    j["upper_label"] = upper_label;
    j["lower_bound"] = lower_bound.str();
    j["lower_label"] = lower_label;
    if (measured) j["measured"] = *measured;
    j["strictly_below_config_count"] = strictly_below_config_count;
    j["pass"] = pass;
    return j.dump(1);
}

}  // namespace sdbm
