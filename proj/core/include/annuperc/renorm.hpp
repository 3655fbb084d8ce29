#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "annuperc/pointfield.hpp"

namespace annuperc {

struct Site {
    int x = 0;
    int y = 0;
    auto operator<=>(const Site&) const = default;
};

/// Parameter bundle for the block renormalization. K and the budget N follow
/// from (eta, r, eps, R); the remaining constraints are evaluated as flags so
/// exploratory runs can proceed with them recorded even when they fail (they
/// cannot hold at any eps reachable by simulation).
struct RenormParams {
    double eta = 0.1;   // area excess, |A| = 1 + eta
    double r = 1.0;     // annulus outer radius
    double eps = 0.1;   // annulus thinness
    double R = 10.0;    // block half-scale; blocks are 6R x 6R
    std::uint64_t n = 1;  // relay point-set size per site
    double K = 0.0;     // per-generation cap, (1/eta) log(3R^2/(eta r^2))
    double N = 0.0;     // per-bond tested-point budget, n K (R/r)^2 + n (R/r)
    double T = 0.0;     // branching horizon, (R/r)^2

    double c0 = 1.0, c2 = 1.0, c3 = 1.0, c4 = 1.0;

    double cap_consistency_residual = 0.0;  // |e^{eta K} eta/3 - T| / T
    bool phase1_interference_ok = false;    // (R/r)^2 c2 (3N + n + nKT) sqrt(eps) <= c0/2
    bool growth_interference_ok = false;    // c2 (3N + n + nKT + n R/r) sqrt(eps) <= eta/2
    bool growth_reach_ok = false;           // n <= (1 + eta/2)^{R/r}
    bool success_margin_ok = false;         // c0 n eta^2 / 120 >= log 10

    double ratio() const { return R / r; }
    std::uint64_t cap() const;      // floor(K), at least 1
    std::uint64_t horizon() const;  // (R/r)^2 rounded
    std::uint64_t growth_steps() const;  // floor(R/r), at least 1
    double separation() const;      // r sqrt(eps)
};

struct ParamOverrides {
    std::optional<double> c0, c2, c3, c4;
    std::optional<std::uint64_t> n;
    std::optional<double> R_over_r;
    /// Replaces the derived cap; desk-scale presets need this because the
    /// derived K collapses below 1 at large eta. The budget N follows the
    /// override so the |Q'| <= N accounting stays intact; the consistency
    /// residual then records how far the override sits from the identity.
    std::optional<double> K;
};

RenormParams derive_params(double eta, double r, double eps, const ParamOverrides& o = {});

/// Smallest n with c0 n eta^2 / 120 >= log 10.
double min_relay_count(double c0, double eta);
/// Smallest R/r with n <= (1 + eta/2)^{R/r}.
double min_scale_ratio(double n, double eta);

/// Block of a lattice site: 6R s + [-3R, 3R]^2.
Rect site_box(Site s, double R);
/// Middle square 6R s + [-2R, 2R]^2.
Rect site_core(Site s, double R);
/// Phase-1 landing square 6R s + [-R, R]^2.
Rect site_center(Site s, double R);

struct OrientedBond {
    Site from, to;
    bool vertical = false;
    int level = 0;                 // l1 distance of the source from the origin
    std::uint64_t order_index = 0;
};

/// First-quadrant bonds in canonical order: by source l1 level, within a
/// level by source x, the vertical bond before the horizontal one.
std::vector<OrientedBond> bond_order(int depth);

struct BondOutcome {
    bool open = false;
    bool trivially_open = false;      // opened by the no-path rule, not explored
    std::vector<Vec2> p_prime;
    std::vector<Vec2> q_prime;
    std::uint32_t seeds_found = 0;    // phase-1 successes (X)
    std::uint32_t growth_steps_used = 0;
    std::uint64_t points_examined = 0;
};

/// The two-phase bond exploration. Phase 1 runs a truncated branching
/// exploration of the realized field from each relay point, avoiding annuli
/// and separation balls of everything previously tested; a success is a field
/// point in the neighbor block's landing square. Phase 2 grows the successes
/// by annulus steps for up to R/r rounds, stopping as soon as a layer reaches
/// n points; that final layer is P'. Throws if P leaves the source core or
/// the separation precondition fails.
BondOutcome bond_explore(const PointField& field, Site from, Site to,
                         std::span<const Vec2> P, std::span<const Vec2> Q,
                         const RenormParams& params, RngStream& rng);

/// Greedy relay selection: field points of the site core taken from the
/// center outward under the pairwise separation constraint. Returns fewer
/// than n points when the core cannot supply them.
std::vector<Vec2> pick_relays(const PointField& field, Site s, const RenormParams& params);

struct ConditionReport {
    bool a = false, b = false, c = false, d = false, e = false;
    std::string detail;
    bool all() const { return a && b && c && d && e; }
};

/// Independent geometric re-check of the five bond postconditions.
ConditionReport verify_bond(const BondOutcome& out, Site from, Site to,
                            std::span<const Vec2> P, std::span<const Vec2> Q,
                            const RenormParams& params);

/// Points of the field the bond outcome is allowed to depend on: inside the
/// bond rectangle, inside some annulus around P or Q', outside every annulus
/// around Q. Replaying the bond on this restriction must reproduce it.
std::vector<Vec2> bond_relevant_points(const PointField& field, Site from, Site to,
                                       std::span<const Vec2> P, std::span<const Vec2> Q,
                                       const BondOutcome& out, const RenormParams& params);

struct LatticeRecord {
    OrientedBond bond;
    char rule = 'b';                 // 'a' no-path rule, 'b' explored
    bool open = false;
    std::uint32_t p_prime_size = 0;
    std::uint32_t q_prime_size = 0;
    std::uint32_t q_in_rect = 0;     // |Q ∩ (S_x ∪ S_y)| at evaluation time
    bool budget_ok = true;           // q_in_rect <= 3N
};

struct LatticeTrace {
    bool init_ok = false;
    std::string init_error;
    std::vector<LatticeRecord> records;
    std::map<Site, std::vector<Vec2>> p_sets;
    std::vector<Vec2> q_cumulative;
    std::set<Site> reached;          // sites with a directed open path from the origin
};

/// Runs the oriented-lattice driver over bonds with source level < depth,
/// maintaining the cumulative tested set and per-site relay sets.
LatticeTrace lattice_run(const PointField& field, int depth, const RenormParams& params,
                         std::uint64_t master_seed);

/// Box covering every block a depth-limited run can touch.
Box lattice_field_box(int depth, double R);

struct SurvivalFrequency {
    double frequency = 0.0;
    double stderr_ = 0.0;
    std::uint64_t trials = 0;
};

/// Independent oriented bond percolation on the first quadrant; survival
/// means some site at l1 distance `depth` is reached from the origin.
SurvivalFrequency oriented_bond_percolation(double p, int depth, std::uint64_t trials,
                                            std::uint64_t seed);

}  // namespace annuperc
