#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "annuperc/pointfield.hpp"

using namespace annuperc;

TEST_CASE("poisson counts concentrate") {
    Box box{{0.0, 0.0}, 100.0, 100.0, Topology::Hard};
    PointField f = PointField::sample_poisson(box, 1.0, 1.0, 42);
    CHECK(std::llabs(static_cast<long long>(f.size()) - 10000) <= 400);

    // near-empty limit
    Box tiny{{0.0, 0.0}, 1.0, 1.0, Topology::Hard};
    CHECK(PointField::sample_poisson(tiny, 1e-9, 1.0, 7).size() == 0);

    // mean over many seeds for |box| = 50
    double sum = 0.0;
    const int reps = 10000;
    Box b50{{0.0, 0.0}, 10.0, 5.0, Topology::Hard};
    for (int s = 0; s < reps; ++s)
        sum += static_cast<double>(PointField::sample_poisson(b50, 1.0, 1.0, 1000 + s).size());
    CHECK(std::fabs(sum / reps - 50.0) <= 3.0 * std::sqrt(50.0 / reps));
}

TEST_CASE("poisson sampler moments across both regimes") {
    RngStream rng(31, "poisson-moments");
    for (double mean : {0.5, 5.0, 29.5, 40.0, 1000.0}) {
        const std::uint64_t n = 200000;
        double sum = 0.0, sum_sq = 0.0;
        for (std::uint64_t i = 0; i < n; ++i) {
            const double k = static_cast<double>(rng.poisson(mean));
            sum += k;
            sum_sq += k * k;
        }
        const double m = sum / n;
        const double v = sum_sq / n - m * m;
        CHECK(std::fabs(m - mean) <= 4.0 * std::sqrt(mean / n));
        // var of the sample variance of a Poisson is (mu + 2 mu^2)/n to leading order
        CHECK(std::fabs(v - mean) <= 4.0 * std::sqrt((mean + 2.0 * mean * mean) / n));
    }
}

TEST_CASE("grid index partitions the points exactly") {
    Box box{{-3.0, 2.0}, 7.0, 5.0, Topology::Hard};
    PointField f = PointField::sample_poisson(box, 3.0, 0.9, 11);
    std::set<std::uint32_t> seen;
    for (int cy = 0; cy < f.grid_ny(); ++cy) {
        for (int cx = 0; cx < f.grid_nx(); ++cx) {
            for (std::uint32_t idx : f.cell_points(cx, cy)) {
                CHECK(seen.insert(idx).second);  // no duplicates
                int px, py;
                f.cell_of(f.point(idx), px, py);
                CHECK(px == cx);
                CHECK(py == cy);
            }
        }
    }
    CHECK(seen.size() == f.size());
}

TEST_CASE("annulus neighbors match brute force") {
    RngStream rng(77, "nbr-test");
    for (int rep = 0; rep < 100; ++rep) {
        const bool torus = rep % 2 == 1;
        Box box{{0.0, 0.0}, 12.0, 9.0, torus ? Topology::Torus : Topology::Hard};
        PointField f = PointField::sample_poisson(box, rng.uniform(0.5, 4.0), 1.0,
                                                  5000 + static_cast<std::uint64_t>(rep));
        if (f.size() > 500) continue;
        Annulus a(rep % 4 < 2 ? Norm::Round : Norm::Square, 1.0, rng.uniform(0.1, 1.0));
        for (int c = 0; c < 20; ++c) {
            Vec2 center{rng.uniform(0.0, 12.0), rng.uniform(0.0, 9.0)};
            auto fast = f.annulus_neighbors(center, a);
            std::set<std::uint32_t> expect;
            for (std::uint32_t i = 0; i < f.size(); ++i) {
                Vec2 delta = box.min_image(f.point(i) - center);
                if ((delta.x != 0.0 || delta.y != 0.0) && a.contains(delta)) expect.insert(i);
            }
            CHECK(std::set<std::uint32_t>(fast.begin(), fast.end()) == expect);
        }
    }
}

TEST_CASE("single neighbor on the boundary is inclusive") {
    Box box{{0.0, 0.0}, 10.0, 10.0, Topology::Hard};
    PointField f = PointField::from_points(box, {{6.0, 5.0}}, 1.0);
    Annulus a(Norm::Round, 1.0, 0.3);
    CHECK(f.annulus_neighbors({5.0, 5.0}, a).size() == 1);
    CHECK(f.annulus_neighbors({5.0, 5.0}, Annulus(Norm::Round, 0.999, 0.3)).empty());
    // empty field
    PointField e = PointField::from_points(box, {}, 1.0);
    CHECK(e.annulus_neighbors({5.0, 5.0}, a).empty());
    // query center outside the box still sees in-box neighbors
    CHECK(f.annulus_neighbors({7.0, 5.0}, a).size() == 1);
}

TEST_CASE("torus neighbor statistics are translation invariant") {
    Box box{{0.0, 0.0}, 12.0, 12.0, Topology::Torus};
    PointField f = PointField::sample_poisson(box, 1.5, 1.0, 1313);
    Annulus a(Norm::Round, 1.0, 0.6);
    auto degree_multiset = [&](const PointField& field) {
        std::multiset<std::size_t> m;
        for (std::uint32_t i = 0; i < field.size(); ++i)
            m.insert(field.annulus_neighbors(field.point(i), a).size());
        return m;
    };
    auto base = degree_multiset(f);
    RngStream rng(4, "torus-shift");
    for (int t = 0; t < 10; ++t) {
        Vec2 shift{rng.uniform(0.0, 12.0), rng.uniform(0.0, 12.0)};
        std::vector<Vec2> moved;
        for (const Vec2& p : f.points()) {
            double x = std::fmod(p.x + shift.x, 12.0);
            double y = std::fmod(p.y + shift.y, 12.0);
            moved.push_back({x, y});
        }
        PointField g = PointField::from_points(box, std::move(moved), 1.0);
        CHECK(degree_multiset(g) == base);
    }
}

TEST_CASE("replay determinism and CSV round trip") {
    Box box{{1.0, -2.0}, 20.0, 15.0, Topology::Hard};
    PointField f1 = PointField::sample_poisson(box, 1.2, 0.8, 90210);
    PointField f2 = PointField::sample_poisson(box, 1.2, 0.8, 90210);
    REQUIRE(f1.size() == f2.size());
    for (std::uint32_t i = 0; i < f1.size(); ++i) CHECK(f1.point(i) == f2.point(i));

    std::stringstream ss;
    f1.save_csv(ss);
    PointField f3 = PointField::load_csv(ss);
    REQUIRE(f3.size() == f1.size());
    for (std::uint32_t i = 0; i < f1.size(); ++i) CHECK(f1.point(i) == f3.point(i));
    CHECK(f3.seed() == f1.seed());
    CHECK(f3.intensity() == f1.intensity());

    // replay from the recorded header parameters alone
    PointField f4 = PointField::sample_poisson(f3.box(), f3.intensity(), f3.cell_size(), f3.seed());
    REQUIRE(f4.size() == f1.size());
    for (std::uint32_t i = 0; i < f1.size(); ++i) CHECK(f1.point(i) == f4.point(i));
}

TEST_CASE("boundary-safe expansion") {
    Box box{{0.0, 0.0}, 10.0, 8.0, Topology::Hard};
    Box e = box.expanded(1.5);
    CHECK(e.origin.x == doctest::Approx(-1.5));
    CHECK(e.width == doctest::Approx(13.0));
    CHECK(e.height == doctest::Approx(11.0));
}

TEST_CASE("tested region: coverage semantics and the linear-scan oracle") {
    Annulus a(Norm::Round, 1.0, 0.25);
    TestedRegion region(a, 0.5);
    CHECK_FALSE(region.query({0.0, 0.0}));

    region.add({0.0, 0.0});
    CHECK(region.query({0.0, 0.0}));       // inside its own ball
    CHECK(region.query({0.9, 0.0}));       // inside the annulus
    CHECK_FALSE(region.query({0.6, 0.0})); // between ball and inner radius
    CHECK_FALSE(region.query({1.2, 0.0}));

    RngStream rng(6, "tested-region");
    TestedRegion big(a, 0.25);
    std::vector<Vec2> centers;
    for (int i = 0; i < 1000; ++i) {
        Vec2 z{rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0)};
        centers.push_back(z);
        big.add(z);
    }
    for (int i = 0; i < 1000; ++i) {
        Vec2 p{rng.uniform(-22.0, 22.0), rng.uniform(-22.0, 22.0)};
        bool expect = false;
        for (const Vec2& z : centers) {
            const double d = norm2(p - z);
            if (d <= 0.25 || (d >= a.inner() && d <= a.r)) {
                expect = true;
                break;
            }
        }
        CHECK(big.query(p) == expect);
    }
}

TEST_CASE("tested region annulus exemption is by exact center") {
    Annulus a(Norm::Round, 1.0, 0.25);
    TestedRegion region(a, 0.1);
    const Vec2 z{1.0, 1.0};
    region.add(z);
    const Vec2 probe{1.9, 1.0};
    CHECK(region.covered_by_annulus(probe, nullptr));
    CHECK_FALSE(region.covered_by_annulus(probe, &z));
}
