#pragma once

#include <cstdint>
#include <vector>

#include "sdbm/model.hpp"

namespace sdbm {

// Small dense LP: maximize c.x subject to A x <= b and lo <= x <= hi.
// Solved with Seidel's randomized incremental algorithm; intended for few
// variables (region-activity checks) and many constraints. The box bounds
// must be finite so every subproblem is bounded.
struct LpProblem {
    Vec c;
    std::vector<Vec> constraint_normals;
    std::vector<double> constraint_offsets;
    Vec lo, hi;
};

struct LpSolution {
    enum class Status { optimal, infeasible };
    Status status = Status::infeasible;
    Vec x;
    double value = 0.0;
};

LpSolution solve_lp(const LpProblem& problem, std::uint64_t seed = 0);

}  // namespace sdbm
