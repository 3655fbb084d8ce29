#include "annuperc/branching.hpp"

#include <cmath>
#include <stdexcept>

namespace annuperc {

GWTrace gw_run(const GWConfig& cfg, RngStream& rng) {
    if (cfg.eta < -1.0) throw std::invalid_argument("gw_run: offspring mean cannot be negative");
    if (cfg.cap != kNoCap && cfg.cap < 1) throw std::invalid_argument("gw_run: cap must be >= 1");
    const double mean = 1.0 + cfg.eta;
    GWTrace out;
    out.population.reserve(cfg.horizon + 1);
    std::uint64_t n = 1;
    out.population.push_back(n);
    for (std::uint64_t t = 0; t < cfg.horizon && n > 0; ++t) {
        std::uint64_t next;
        if (cfg.count_only) {
            // total offspring of n nodes is one Poisson(n * mean) draw
            next = static_cast<std::uint64_t>(rng.poisson(static_cast<double>(n) * mean));
        } else {
            next = 0;
            for (std::uint64_t i = 0; i < n; ++i)
                next += static_cast<std::uint64_t>(rng.poisson(mean));
        }
        if (cfg.cap != kNoCap && next > cfg.cap) next = cfg.cap;
        n = next;
        out.population.push_back(n);
    }
    // an extinct line stays extinct through the horizon
    while (out.population.size() < cfg.horizon + 1) out.population.push_back(0);
    out.survived = out.population.back() > 0;
    out.hit_target =
        static_cast<double>(out.population.back()) >=
        std::pow(mean, static_cast<double>(cfg.horizon));
    return out;
}

double solve_lambda(double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("solve_lambda: eta must be positive");
    const double mean = 1.0 + eta;
    auto f = [&](double x) { return -std::expm1(-x) * mean - x; };
    double lo = 1e-300, hi = mean;
    // f > 0 just above zero (slope eta) and f(1+eta) < 0
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

SurvivalEstimate truncated_survival(double eta, std::uint64_t cap, std::uint64_t horizon,
                                    std::uint64_t runs, std::uint64_t seed,
                                    bool allow_out_of_range) {
    if (runs == 0) throw std::invalid_argument("truncated_survival: need runs");
    if (!allow_out_of_range && eta > 0.0 && cap != kNoCap) {
        const double limit = std::exp(eta * static_cast<double>(cap)) * eta / 3.0;
        if (static_cast<double>(horizon) > limit)
            throw std::invalid_argument(
                "truncated_survival: horizon exceeds e^{eta K} eta / 3; pass "
                "allow_out_of_range to explore anyway");
    }
    GWConfig cfg{eta, cap, horizon, /*count_only=*/true};
    std::uint64_t alive = 0;
    for (std::uint64_t i = 0; i < runs; ++i) {
        RngStream rng(seed, "gw-survival", i);
        if (gw_run(cfg, rng).survived) ++alive;
    }
    const double p = static_cast<double>(alive) / static_cast<double>(runs);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(runs)), runs};
}

double step_variance(const Annulus& a) {
    if (a.norm != Norm::Round)
        throw std::invalid_argument("step_variance: closed form derived for the round annulus");
    const double q = 1.0 - a.eps;
    return a.r * a.r * (1.0 + q * q) / 4.0;
}

SpatialRunResult spatial_branching_run(const Annulus& a, double eta, std::uint64_t cap,
                                       std::uint64_t horizon, Vec2 z0, double block_scale,
                                       RngStream& rng) {
    const double R = block_scale;
    if (!(R > 0.0)) throw std::invalid_argument("spatial_branching_run: block scale must be positive");
    if (eta < -1.0) throw std::invalid_argument("spatial_branching_run: offspring mean cannot be negative");
    if (std::fabs(z0.x) > 2.0 * R || std::fabs(z0.y) > 2.0 * R)
        throw std::invalid_argument("spatial_branching_run: z0 must lie in [-2R, 2R]^2");

    const Rect safe{-3.0 * R + a.r, -3.0 * R + a.r, 3.0 * R - a.r, 9.0 * R - a.r};
    const Rect target{-R, 5.0 * R, R, 7.0 * R};
    const double mean = 1.0 + eta;

    struct Node {
        Vec2 pos;
        bool safe_path;  // every node from the root through this one in the strip
    };
    std::vector<Node> gen{{z0, safe.contains(z0)}};
    std::vector<Node> next;

    SpatialRunResult out;
    if (cap == 0) return out;

    for (std::uint64_t t = 0; t < horizon && !gen.empty(); ++t) {
        next.clear();
        for (const Node& v : gen) {
            const long long kids = rng.poisson(mean);
            for (long long c = 0; c < kids; ++c) {
                Vec2 pos = v.pos + sample_in_annulus(a, rng);
                next.push_back({pos, v.safe_path && safe.contains(pos)});
            }
        }
        // truncation removes uniformly random nodes, independent of location
        if (cap != kNoCap && next.size() > cap) {
            rng.partial_shuffle(next, cap);
            next.resize(cap);
        }
        gen.swap(next);
    }

    out.final_count = gen.size();
    out.survived = !gen.empty();
    if (out.survived) {
        const Node& pick = gen[rng.uniform_below(gen.size())];
        out.sampled_node = pick.pos;
        out.ancestors_safe = pick.safe_path;
        out.event_hit = pick.safe_path && target.contains(pick.pos);
    }
    return out;
}

}  // namespace annuperc
