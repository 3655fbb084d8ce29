#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "annuperc/geometry.hpp"
#include "annuperc/rng.hpp"
#include "annuperc/vec2.hpp"

namespace annuperc {

inline constexpr std::uint64_t kNoCap = std::numeric_limits<std::uint64_t>::max();

/// Galton-Watson configuration: Poisson offspring with mean 1 + eta, optional
/// per-generation cap K (kNoCap disables truncation), horizon T.
struct GWConfig {
    double eta = 0.0;            // offspring mean is 1 + eta, eta > -1
    std::uint64_t cap = kNoCap;  // K >= 1 when finite
    std::uint64_t horizon = 0;   // T
    bool count_only = true;      // superposition shortcut vs node-by-node draws
};

struct GWTrace {
    std::vector<std::uint64_t> population;  // N_0..N_T
    bool survived = false;                  // N_T > 0
    bool hit_target = false;                // N_T >= (1+eta)^T
};

GWTrace gw_run(const GWConfig& cfg, RngStream& rng);

/// Positive root of (1 - e^{-lambda})(1 + eta) = lambda, by bisection to
/// 1e-12 absolute. Requires eta > 0; the root always exceeds eta.
double solve_lambda(double eta);

struct SurvivalEstimate {
    double frequency = 0.0;
    double stderr_ = 0.0;
    std::uint64_t runs = 0;
};

/// Survival frequency of the capped process at the horizon. The horizon must
/// respect T <= e^{eta K} eta / 3 unless allow_out_of_range is set.
SurvivalEstimate truncated_survival(double eta, std::uint64_t cap, std::uint64_t horizon,
                                    std::uint64_t runs, std::uint64_t seed,
                                    bool allow_out_of_range = false);

/// Per-coordinate variance of a uniform draw from a round annulus:
/// r^2 (1 + (1-eps)^2) / 4, by polar integration of the density ~ rho.
double step_variance(const Annulus& a);

struct SpatialRunResult {
    bool survived = false;
    bool event_hit = false;      // sampled node in target, ancestors in the safe strip
    Vec2 sampled_node{0.0, 0.0}; // position of the uniformly sampled survivor
    bool ancestors_safe = false; // its whole ancestor path stayed in the safe strip
    std::uint64_t final_count = 0;
};

/// Branching random walk: Poisson(1 + eta) offspring, displacements uniform
/// in the annulus, per-generation cap with location-independent truncation,
/// run for `horizon` generations from z0. On survival a uniform node of the
/// final generation is sampled; the event asks for it to land in
/// (0, 6R) + [-R, R]^2 with its whole ancestor path inside
/// [-3R + r, 3R - r] x [-3R + r, 9R - r].
SpatialRunResult spatial_branching_run(const Annulus& a, double eta, std::uint64_t cap,
                                       std::uint64_t horizon, Vec2 z0, double block_scale,
                                       RngStream& rng);

}  // namespace annuperc
