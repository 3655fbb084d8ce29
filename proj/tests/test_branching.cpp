#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "annuperc/branching.hpp"

using namespace annuperc;

TEST_CASE("offspring mean zero dies immediately") {
    GWConfig cfg{-1.0, kNoCap, 5, true};
    RngStream rng(1, "gw-zero");
    GWTrace tr = gw_run(cfg, rng);
    CHECK(tr.population[1] == 0);
    CHECK_FALSE(tr.survived);
}

TEST_CASE("population moments at eta = 1, t = 2") {
    const std::uint64_t runs = 100000;
    double sum = 0.0, sum_sq = 0.0;
    GWConfig cfg{1.0, kNoCap, 2, true};
    for (std::uint64_t i = 0; i < runs; ++i) {
        RngStream rng(17, "gw-moments-t2", i);
        const double n = static_cast<double>(gw_run(cfg, rng).population.back());
        sum += n;
        sum_sq += n * n;
    }
    const double mean = sum / runs;
    const double var = sum_sq / runs - mean * mean;
    // E = (1+eta)^2 = 4, Var = 4 (4 - 1) / 1 = 12
    CHECK(std::fabs(mean - 4.0) <= 3.0 * std::sqrt(12.0 / runs));
    CHECK(std::fabs(var - 12.0) <= 0.05 * 12.0);
}

TEST_CASE("lower tail of the normalized population") {
    const double eta = 0.1;
    const std::uint64_t runs = 30000, horizon = 20;
    std::uint64_t hits = 0, extinct = 0;
    GWConfig cfg{eta, kNoCap, horizon, true};
    for (std::uint64_t i = 0; i < runs; ++i) {
        RngStream rng(18, "gw-tail", i);
        GWTrace tr = gw_run(cfg, rng);
        hits += tr.hit_target;
        extinct += tr.population.back() == 0;
    }
    const double p = double(hits) / double(runs);
    const double q = double(extinct) / double(runs);
    const double se_p = std::sqrt(p * (1 - p) / double(runs));
    CHECK(p >= eta * std::exp(-2.0 * (1.0 + eta)) - 3.0 * se_p);
    // chained variant with the measured extinction probability
    const double se_q = std::sqrt(q * (1 - q) / double(runs));
    CHECK(p >= eta * (q - 3.0 * se_q) * (q - 3.0 * se_q) - 3.0 * se_p);
}

TEST_CASE("extinction probability is monotone in time and bounded below") {
    const double eta = 0.2;
    const std::uint64_t runs = 20000, horizon = 12;
    std::vector<std::uint64_t> extinct(horizon + 1, 0);
    GWConfig cfg{eta, kNoCap, horizon, true};
    for (std::uint64_t i = 0; i < runs; ++i) {
        RngStream rng(19, "gw-extinction", i);
        GWTrace tr = gw_run(cfg, rng);
        for (std::uint64_t t = 0; t <= horizon; ++t)
            if (tr.population[t] == 0) ++extinct[t];
    }
    for (std::uint64_t t = 1; t <= horizon; ++t) CHECK(extinct[t] >= extinct[t - 1]);
    const double q1 = double(extinct[1]) / double(runs);
    const double target = std::exp(-(1.0 + eta));
    CHECK(q1 >= target - 3.0 * std::sqrt(target * (1 - target) / double(runs)));
}

TEST_CASE("fixed point of the survival transform") {
    CHECK(solve_lambda(1e-8) < 1e-3);
    for (double eta : {0.01, 0.1, 0.5}) {
        const double lambda = solve_lambda(eta);
        CHECK(lambda > eta);
        CHECK(std::fabs(-std::expm1(-lambda) * (1.0 + eta) - lambda) < 1e-12);
    }
    // frozen by the bisection itself
    CHECK(solve_lambda(0.1) == doctest::Approx(0.193747557995).epsilon(1e-9));
    CHECK_THROWS_AS(solve_lambda(0.0), std::invalid_argument);
}

TEST_CASE("martingale identity of the survival transform") {
    const double eta = 0.15;
    const double lambda = solve_lambda(eta);
    RngStream rng(23, "martingale");
    for (std::uint64_t m : {1ULL, 5ULL, 20ULL}) {
        const std::uint64_t reps = 200000;
        double sum = 0.0, sum_sq = 0.0;
        for (std::uint64_t i = 0; i < reps; ++i) {
            const double next = static_cast<double>(rng.poisson(double(m) * (1.0 + eta)));
            const double v = std::exp(-lambda * next);
            sum += v;
            sum_sq += v * v;
        }
        const double mean = sum / reps;
        const double se = std::sqrt(std::max(0.0, sum_sq / reps - mean * mean) / reps);
        CHECK(std::fabs(mean - std::exp(-lambda * double(m))) <= 3.0 * se + 1e-12);
    }
}

TEST_CASE("single-node chain when the cap is one") {
    // with cap 1 the process survives iff every generation draws at least one child
    const double eta = 2.0;
    const std::uint64_t horizon = 6, runs = 40000;
    std::uint64_t alive = 0;
    GWConfig cfg{eta, 1, horizon, true};
    for (std::uint64_t i = 0; i < runs; ++i) {
        RngStream rng(29, "gw-chain", i);
        alive += gw_run(cfg, rng).survived;
    }
    const double p = double(alive) / double(runs);
    const double expect = std::pow(-std::expm1(-(1.0 + eta)), double(horizon));
    CHECK(std::fabs(p - expect) <= 3.0 * std::sqrt(expect * (1 - expect) / double(runs)));
}

TEST_CASE("truncated survival bounds at the published parameters") {
    const double eta = 0.1;
    SurvivalEstimate se = truncated_survival(eta, 100, 734, 3000, 31);
    CHECK(se.frequency >= eta / 3.0 - 3.0 * se.stderr_);
    const double lambda = solve_lambda(eta);
    const double bound = std::exp(-lambda) + 734.0 * std::exp(-lambda * 100.0);
    CHECK(1.0 - se.frequency <= bound + 3.0 * se.stderr_);

    // horizon precondition is enforced unless explicitly waived
    CHECK_THROWS_AS(truncated_survival(eta, 100, 800, 10, 1), std::invalid_argument);
    CHECK_NOTHROW(truncated_survival(eta, 100, 800, 10, 1, true));
}

TEST_CASE("count-only shortcut matches node-by-node truncation in distribution") {
    const double eta = 0.2;
    const std::uint64_t horizon = 10, cap = 50, reps = 10000;
    std::vector<double> a, b;
    for (std::uint64_t i = 0; i < reps; ++i) {
        RngStream r1(37, "gw-two-sample-a", i);
        RngStream r2(38, "gw-two-sample-b", i);
        GWConfig c1{eta, cap, horizon, true};
        GWConfig c2{eta, cap, horizon, false};
        a.push_back(static_cast<double>(gw_run(c1, r1).population.back()));
        b.push_back(static_cast<double>(gw_run(c2, r2).population.back()));
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    // two-sample Kolmogorov-Smirnov at alpha = 0.001, comparing the empirical
    // CDFs at distinct values only (the data is discrete and heavily tied)
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::fabs(double(i) / a.size() - double(j) / b.size()));
    }
    const double crit = 1.949 * std::sqrt(2.0 / double(reps));
    CHECK(d <= crit);
}

TEST_CASE("per-coordinate step variance of the uniform annulus draw") {
    CHECK(step_variance(Annulus(Norm::Round, 2.0, 1.0)) == doctest::Approx(1.0));  // r^2/4
    CHECK(step_variance(Annulus(Norm::Round, 1.0, 1e-9)) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK_THROWS_AS(step_variance(Annulus(Norm::Square, 1.0, 0.5)), std::invalid_argument);

    Annulus a(Norm::Round, 1.5, 0.45);
    RngStream rng(41, "step-var");
    const std::uint64_t n = 1000000;
    double sx = 0, sxx = 0, sxxxx = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        const double x = sample_in_annulus(a, rng).x;
        sx += x;
        sxx += x * x;
        sxxxx += x * x * x * x;
    }
    const double mean = sx / n;
    const double var = sxx / n - mean * mean;
    const double target = step_variance(a);
    const double se_var = std::sqrt(std::max(0.0, sxxxx / n - (sxx / n) * (sxx / n)) / n);
    CHECK(std::fabs(mean) <= 3.0 * std::sqrt(var / n));
    CHECK(std::fabs(var - target) <= 3.0 * se_var);
}

TEST_CASE("spatial branching structural invariants") {
    Annulus a(Norm::Round, 1.0, 0.5);
    RngStream rng(43, "spatial-structure");

    // cap zero can never survive
    SpatialRunResult dead = spatial_branching_run(a, 0.5, 0, 10, {0.0, 0.0}, 10.0, rng);
    CHECK_FALSE(dead.survived);

    // surviving runs sample a node; safe flags imply the strip contains it
    const double R = 8.0;
    int seen = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        RngStream r(44, "spatial-structure", i);
        SpatialRunResult res = spatial_branching_run(a, 0.3, 30, 25, {1.0, -2.0}, R, r);
        if (!res.survived) continue;
        ++seen;
        if (res.ancestors_safe) {
            CHECK(res.sampled_node.x >= -3.0 * R + a.r);
            CHECK(res.sampled_node.x <= 3.0 * R - a.r);
            CHECK(res.sampled_node.y >= -3.0 * R + a.r);
            CHECK(res.sampled_node.y <= 9.0 * R - a.r);
        }
        if (res.event_hit) {
            CHECK(res.ancestors_safe);
            CHECK(std::fabs(res.sampled_node.x) <= R);
            CHECK(res.sampled_node.y >= 5.0 * R);
            CHECK(res.sampled_node.y <= 7.0 * R);
        }
    }
    CHECK(seen > 0);
    CHECK_THROWS_AS(spatial_branching_run(a, 0.1, 10, 10, {30.0, 0.0}, 10.0, rng),
                    std::invalid_argument);
}

TEST_CASE("root-to-child displacements stay in the annulus") {
    // replicate the child construction directly: parent + uniform annulus draw
    Annulus a(Norm::Round, 2.0, 0.35);
    RngStream rng(47, "spatial-steps");
    Vec2 parent{3.0, -1.0};
    for (int i = 0; i < 10000; ++i) {
        Vec2 child = parent + sample_in_annulus(a, rng);
        CHECK(a.contains(child - parent));
    }
}
