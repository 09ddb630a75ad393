#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdbm/model.hpp"

namespace sdbm {

using BigInt = boost::multiprecision::cpp_int;

// One affine member of the family: E(v, H) = gradient . v + intercept.
struct AffinePiece {
    std::uint64_t config = 0;
    Vec gradient;
    double intercept = 0.0;
};

// Axis-aligned box; empty bounds mean all of R^{N_vis}.
struct Domain {
    std::optional<Vec> lo, hi;
    bool bounded() const { return lo.has_value(); }
    static Domain full() { return {}; }
    static Domain box(Vec lo, Vec hi);
};

struct ActiveRegion {
    std::uint64_t config = 0;
    Vec witness;
    Vec gradient;
    double intercept = 0.0;
};

struct RegionReport {
    long long count = 0;
    std::string method;       // envelope-1d | lp-exact | grid-estimate
    bool exact = true;        // grid-estimate is a lower bound only
    Domain domain;
    std::vector<ActiveRegion> active;

    std::string to_json(const NetworkSpec& spec) const;
};

enum class CountMethod { automatic, envelope_1d, lp_exact, grid_estimate };

// Per hidden configuration, the gradient and intercept of E(v, H) as an
// affine function of v. Requires no visible-visible connections (always
// true for supported topologies).
inline constexpr int kAffineHiddenCap = 25;
std::vector<AffinePiece> affine_family(const Model& model, int hidden_cap = kAffineHiddenCap);

// Groups pieces by exact gradient equality, keeping only the minimum
// intercept of each group. near_tie_flags (optional) receives configs whose
// gradients differ by less than rtol without being exactly equal.
std::vector<AffinePiece> reduce_by_gradient(const std::vector<AffinePiece>& family,
                                            double near_tie_rtol = 1e-12,
                                            std::vector<std::uint64_t>* near_tie_flags = nullptr);

// Lower envelope of lines for N_vis = 1 by slope sort + hull sweep.
RegionReport count_regions_1d(const std::vector<AffinePiece>& family,
                              const Domain& domain = Domain::full());

struct LpActivity {
    bool active = false;
    Vec witness;
    double margin = 0.0;  // optimal strict-domination slack t
};

// Exact activity oracle: maximize t subject to the piece being below every
// other reduced piece by t across the domain. Active iff t > eps. On the
// full domain the program is homogenized so the answer does not depend on
// any a-priori bound for the witness; the reported margin is then the slack
// of the normalized program, not an energy difference.
LpActivity is_active_lp(const std::vector<AffinePiece>& reduced_family, std::size_t index,
                        const Domain& domain = Domain::full(), double eps = 1e-9,
                        std::uint64_t seed = 0);

struct CountOptions {
    CountMethod method = CountMethod::automatic;
    Domain domain = Domain::full();
    int lp_family_cap = 4096;
    int grid_resolution = 200;
    std::uint64_t seed = 0;
    double eps = 1e-9;
};

RegionReport count_effective_mixtures(const Model& model, const CountOptions& options = {});

// Exact big-integer evaluation of sum_{j=0}^{n_vis} C(n_hid, j).
BigInt rbm_region_formula(int n_vis, int n_hid);

struct BoundReport {
    Topology topology = Topology::general;
    BigInt upper_bound;
    std::string upper_label;
    BigInt lower_bound;
    std::string lower_label;
    std::optional<long long> measured;
    bool strictly_below_config_count = false;  // DBM with n1 > n0
    bool pass = true;

    std::string to_json() const;
};

BoundReport bound_report(const Model& model, std::optional<long long> measured = std::nullopt);

}  // namespace sdbm
