#include "sdbm/lp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sdbm/rng.hpp"

namespace sdbm {

namespace {

constexpr double kTol = 1e-9;

double slack_tol(double b) { return kTol * (1.0 + std::abs(b)); }

struct SubProblem {
    Vec c;
    double c0 = 0.0;  // objective constant from eliminated variables
    std::vector<Vec> normals;
    std::vector<double> offsets;
    Vec lo, hi;
};

LpSolution solve_recursive(const SubProblem& p, Rng& rng);

LpSolution solve_1d(const SubProblem& p) {
    double lo = p.lo[0], hi = p.hi[0];
    for (std::size_t i = 0; i < p.normals.size(); ++i) {
        const double a = p.normals[i][0];
        const double b = p.offsets[i];
        if (std::abs(a) < 1e-300) {
            if (b < -slack_tol(b)) return {};
            continue;
        }
        if (a > 0.0)
            hi = std::min(hi, b / a);
        else
            lo = std::max(lo, b / a);
    }
    if (lo > hi + kTol * (1.0 + std::abs(lo) + std::abs(hi))) return {};
    LpSolution sol;
    sol.status = LpSolution::Status::optimal;
    sol.x = Vec::Constant(1, p.c[0] >= 0.0 ? std::min(hi, p.hi[0]) : std::max(lo, p.lo[0]));
    sol.value = p.c0 + p.c[0] * sol.x[0];
    return sol;
}

// Substitutes x_k = (b - sum_{j != k} a_j x_j) / a_k into (g, h), producing
// a constraint over the remaining variables.
void substitute(const Vec& g, double h, const Vec& a, double b, int k, Vec& g_out,
                double& h_out) {
    const double r = g[k] / a[k];
    int jj = 0;
    for (int j = 0; j < g.size(); ++j) {
        if (j == k) continue;
        g_out[jj++] = g[j] - r * a[j];
    }
    h_out = h - r * b;
}

LpSolution solve_on_hyperplane(const SubProblem& p, const Vec& a, double b, int k,
                               std::size_t num_prior, const std::vector<std::size_t>& order,
                               Rng& rng) {
    const int d = static_cast<int>(p.c.size());
    SubProblem sub;
    sub.c.resize(d - 1);
    {
        double h_unused;
        substitute(p.c, 0.0, a, b, k, sub.c, h_unused);
        sub.c0 = p.c0 + p.c[k] * b / a[k];
    }
    sub.lo.resize(d - 1);
    sub.hi.resize(d - 1);
    int jj = 0;
    for (int j = 0; j < d; ++j) {
        if (j == k) continue;
        sub.lo[jj] = p.lo[j];
        sub.hi[jj] = p.hi[j];
        ++jj;
    }
    // bounds of the eliminated variable become general constraints:
    // lo_k <= (b - sum a_j x_j)/a_k <= hi_k
    {
        Vec g(d - 1);
        double h;
        Vec ek = Vec::Zero(d);
        ek[k] = 1.0;
        substitute(ek, p.hi[k], a, b, k, g, h);  // x_k <= hi_k
        sub.normals.push_back(g);
        sub.offsets.push_back(h);
        substitute(Vec(-ek), -p.lo[k], a, b, k, g, h);  // -x_k <= -lo_k
        sub.normals.push_back(g);
        sub.offsets.push_back(h);
    }
    for (std::size_t t = 0; t < num_prior; ++t) {
        const std::size_t i = order[t];
        Vec g(d - 1);
        double h;
        substitute(p.normals[i], p.offsets[i], a, b, k, g, h);
        sub.normals.push_back(g);
        sub.offsets.push_back(h);
    }
    LpSolution inner = solve_recursive(sub, rng);
    if (inner.status != LpSolution::Status::optimal) return inner;
    LpSolution sol;
    sol.status = LpSolution::Status::optimal;
    sol.x.resize(d);
    double acc = b;
    int ij = 0;
    for (int j = 0; j < d; ++j) {
        if (j == k) continue;
        sol.x[j] = inner.x[ij++];
        acc -= a[j] * sol.x[j];
    }
    sol.x[k] = acc / a[k];
    sol.value = p.c0 + p.c.dot(sol.x);
    return sol;
}

LpSolution solve_recursive(const SubProblem& p, Rng& rng) {
    const int d = static_cast<int>(p.c.size());
    for (int j = 0; j < d; ++j)
        if (p.lo[j] > p.hi[j] + kTol * (1.0 + std::abs(p.lo[j]))) return {};
    if (d == 1) return solve_1d(p);

    LpSolution sol;
    sol.status = LpSolution::Status::optimal;
    sol.x.resize(d);
    for (int j = 0; j < d; ++j) sol.x[j] = p.c[j] >= 0.0 ? p.hi[j] : p.lo[j];
    sol.value = p.c0 + p.c.dot(sol.x);

    std::vector<std::size_t> order(p.normals.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.next_u64() % i]);

    for (std::size_t t = 0; t < order.size(); ++t) {
        const std::size_t i = order[t];
        const Vec& a = p.normals[i];
        const double b = p.offsets[i];
        if (a.dot(sol.x) <= b + slack_tol(b)) continue;
        int k = 0;
        a.cwiseAbs().maxCoeff(&k);
        if (std::abs(a[k]) < 1e-300) return {};  // 0 . x <= b violated
        LpSolution fixed = solve_on_hyperplane(p, a, b, k, t, order, rng);
        if (fixed.status != LpSolution::Status::optimal) return fixed;
        sol = fixed;
    }
    return sol;
}

}  // namespace

LpSolution solve_lp(const LpProblem& problem, std::uint64_t seed) {
    const int d = static_cast<int>(problem.c.size());
    if (d == 0) throw std::invalid_argument("empty LP");
    if (problem.lo.size() != d || problem.hi.size() != d)
        throw std::invalid_argument("LP bounds dimension mismatch");
    for (int j = 0; j < d; ++j)
        if (!std::isfinite(problem.lo[j]) || !std::isfinite(problem.hi[j]))
            throw std::invalid_argument("LP box bounds must be finite");
    SubProblem p;
    p.c = problem.c;
    p.normals = problem.constraint_normals;
    p.offsets = problem.constraint_offsets;
    p.lo = problem.lo;
    p.hi = problem.hi;
    Rng rng(seed ^ 0x5ee1de1575a1ULL);
    return solve_recursive(p, rng);
}

}  // namespace sdbm
