#include "annuperc/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace annuperc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kClampTol = 1e-12;

double clamp_unit(double x) {
    if (x > 1.0) return 1.0;
    if (x < -1.0) return -1.0;
    return x;
}

// overlap length of [-a, a] and [t-b, t+b]
double interval_overlap_len(double a, double b, double t) {
    double lo = std::max(-a, t - b);
    double hi = std::min(a, t + b);
    return hi > lo ? hi - lo : 0.0;
}

// overlap area of two axis-aligned squares with half-sides a and b,
// centers displaced by (dx, dy)
double square_pair_overlap(double a, double b, double dx, double dy) {
    if (a <= 0.0 || b <= 0.0) return 0.0;
    return interval_overlap_len(a, b, std::fabs(dx)) *
           interval_overlap_len(a, b, std::fabs(dy));
}

// golden-section refinement of f around the best grid point; minimizes f
template <typename F>
double golden_min(F&& f, double lo, double hi, double& arg) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 80 && (b - a) > 1e-13 * std::max(1.0, std::fabs(b)); ++it) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    arg = 0.5 * (a + b);
    return f(arg);
}

template <typename F>
RatioExtremum grid_extremum(F&& f, double lo, double hi, int grid_steps, bool minimize) {
    if (grid_steps < 2) throw std::invalid_argument("grid sweep needs at least 2 steps");
    if (hi < lo) throw std::invalid_argument("grid sweep: empty interval");
    if (hi == lo) return {f(lo), lo};
    const double h = (hi - lo) / (grid_steps - 1);
    double best = minimize ? f(lo) : -f(lo);
    int best_i = 0;
    auto g = [&](double d) { return minimize ? f(d) : -f(d); };
    for (int i = 1; i < grid_steps; ++i) {
        double v = g(lo + i * h);
        if (v < best) {
            best = v;
            best_i = i;
        }
    }
    double a = lo + std::max(0, best_i - 1) * h;
    double b = lo + std::min(grid_steps - 1, best_i + 1) * h;
    double arg = 0.0;
    double v = golden_min(g, a, b, arg);
    // the grid point stays authoritative if refinement landed worse
    if (best < v) {
        v = best;
        arg = lo + best_i * h;
    }
    return {minimize ? v : -v, arg};
}

}  // namespace

Annulus::Annulus(Norm n, double outer_radius, double thinness)
    : norm(n), r(outer_radius), eps(thinness) {
    if (!(r > 0.0)) throw std::invalid_argument("Annulus: outer radius must be positive");
    if (!(eps > 0.0) || eps > 1.0) throw std::invalid_argument("Annulus: eps must be in (0, 1]");
}

double Annulus::area() const {
    const double factor = r * r * eps * (2.0 - eps);
    return norm == Norm::Round ? kPi * factor : 4.0 * factor;
}

bool Annulus::contains(Vec2 v) const {
    const double n = norm == Norm::Round ? norm2(v) : norm_inf(v);
    return n >= inner() && n <= r;
}

double lens_area(double r1, double r2, double d) {
    if (r1 <= 0.0 || r2 <= 0.0) return 0.0;
    if (d >= r1 + r2) return 0.0;
    if (d <= std::fabs(r1 - r2)) {
        const double rm = std::min(r1, r2);
        return kPi * rm * rm;
    }
    const double c1 = clamp_unit((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1));
    const double c2 = clamp_unit((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2));
    double t = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    if (t < 0.0) {
        if (t < -kClampTol) throw std::domain_error("lens_area: negative discriminant");
        t = 0.0;
    }
    return r1 * r1 * std::acos(c1) + r2 * r2 * std::acos(c2) - 0.5 * std::sqrt(t);
}

double overlap_area(const Annulus& a, Vec2 v) {
    const double ro = a.r;
    const double ri = a.inner();
    double area;
    if (a.norm == Norm::Round) {
        const double d = norm2(v);
        area = lens_area(ro, ro, d) - lens_area(ri, ro, d) - lens_area(ro, ri, d) +
               lens_area(ri, ri, d);
    } else {
        area = square_pair_overlap(ro, ro, v.x, v.y) - square_pair_overlap(ri, ro, v.x, v.y) -
               square_pair_overlap(ro, ri, v.x, v.y) + square_pair_overlap(ri, ri, v.x, v.y);
    }
    return area > 0.0 ? area : 0.0;
}

OverlapReport intersection_area(const Annulus& a, double d) {
    if (d < 0.0) throw std::invalid_argument("intersection_area: separation must be nonnegative");
    return {d, overlap_area(a, {d, 0.0}), OverlapReport::Method::Exact, 0.0};
}

OverlapReport intersection_area_mc(const Annulus& a, double d, std::uint64_t samples,
                                   RngStream& rng) {
    if (d < 0.0) throw std::invalid_argument("intersection_area_mc: separation must be nonnegative");
    if (samples == 0) throw std::invalid_argument("intersection_area_mc: need samples");
    const Vec2 shift{d, 0.0};
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        Vec2 p = sample_in_annulus(a, rng);
        if (a.contains(p - shift)) ++hits;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(samples);
    const double area = a.area();
    const double se = area * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
    return {d, p * area, OverlapReport::Method::MonteCarlo, se};
}

RatioExtremum min_overlap_ratio(const Annulus& a, int grid_steps) {
    const double area = a.area();
    auto f = [&](double d) { return overlap_area(a, {d, 0.0}) / area; };
    return grid_extremum(f, a.inner(), a.r, grid_steps, /*minimize=*/true);
}

RatioExtremum sup_overlap_scaled(const Annulus& a, double d_min, int grid_steps) {
    const double floor_d = a.r * std::sqrt(a.eps);
    if (d_min < floor_d - kClampTol)
        throw std::invalid_argument("sup_overlap_scaled: d_min below r*sqrt(eps)");
    const double scale = a.area() * std::sqrt(a.eps);
    auto f = [&](double d) { return overlap_area(a, {d, 0.0}) / scale; };
    const double hi = 2.0 * a.r;
    if (d_min >= hi) return {f(hi), hi};
    return grid_extremum(f, d_min, hi, grid_steps, /*minimize=*/false);
}

OverlapReport cluster_overlap_area(const Annulus& a, std::span<const Vec2> centers,
                                   std::size_t i, std::uint64_t samples, RngStream& rng) {
    if (i >= centers.size()) throw std::invalid_argument("cluster_overlap_area: bad index");
    if (samples == 0) throw std::invalid_argument("cluster_overlap_area: need samples");
    const double sep = a.r * std::sqrt(a.eps);
    for (std::size_t p = 0; p < centers.size(); ++p) {
        for (std::size_t q = p + 1; q < centers.size(); ++q) {
            Vec2 delta = centers[p] - centers[q];
            double dist = a.norm == Norm::Round ? norm2(delta) : norm_inf(delta);
            if (dist < sep)
                throw std::invalid_argument(
                    "cluster_overlap_area: centers violate the r*sqrt(eps) separation");
        }
    }
    const double ri = a.inner();
    std::uint64_t hits = 0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        Vec2 p = centers[i] + sample_in_annulus(a, rng);
        for (std::size_t j = 0; j < centers.size(); ++j) {
            if (j == i) continue;
            Vec2 delta = p - centers[j];
            double dist = a.norm == Norm::Round ? norm2(delta) : norm_inf(delta);
            if (dist <= sep || (dist >= ri && dist <= a.r)) {
                ++hits;
                break;
            }
        }
    }
    const double frac = static_cast<double>(hits) / static_cast<double>(samples);
    const double area = a.area();
    const double se = area * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples));
    return {0.0, frac * area, OverlapReport::Method::MonteCarlo, se};
}

IntervalOverlap interval_overlap_integral(double c, int grid) {
    if (!(c > 0.0)) throw std::invalid_argument("interval_overlap_integral: c must be positive");
    if (grid < 2) throw std::invalid_argument("interval_overlap_integral: grid too small");
    IntervalOverlap out;
    out.closed_form = (2.0 / 3.0) * c * c * c;
    // midpoint rule; the integrand c - |x - y| is piecewise linear, so only
    // the diagonal kink cells contribute error, O(c^3 / grid^2)
    const double h = c / grid;
    double acc = 0.0;
    for (int i = 0; i < grid; ++i) {
        const double x = (i + 0.5) * h;
        double row = 0.0;
        for (int j = 0; j < grid; ++j) {
            const double y = (j + 0.5) * h;
            row += c - std::fabs(x - y);
        }
        acc += row;
    }
    out.quadrature = acc * h * h;
    return out;
}

McEstimate subcritical_certificate(const Annulus& a, std::uint64_t samples, RngStream& rng) {
    McEstimate integral = pair_overlap_integral_mc(a, samples, rng);
    const double area = a.area();
    return {area * area * area - integral.value, integral.stderr_, samples};
}

McEstimate pair_overlap_integral_mc(const Annulus& a, std::uint64_t samples, RngStream& rng) {
    if (samples == 0) throw std::invalid_argument("pair_overlap_integral_mc: need samples");
    double sum = 0.0, sum_sq = 0.0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        Vec2 x = sample_in_annulus(a, rng);
        Vec2 y = sample_in_annulus(a, rng);
        double k = overlap_area(a, x - y);
        sum += k;
        sum_sq += k * k;
    }
    const double n = static_cast<double>(samples);
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    const double area2 = a.area() * a.area();
    return {area2 * mean, area2 * std::sqrt(var / n), samples};
}

double overlap_lower_bound_ratio(double eps) { return eps / (kPi * std::sqrt(3.0)); }

double lower_bound_nc(double eps) {
    if (!(eps > 0.0) || eps > 1.0) throw std::invalid_argument("lower_bound_nc: eps in (0,1]");
    return 1.0 + overlap_lower_bound_ratio(eps);
}

SquareCertificateExact square_annulus_exact_certificate() {
    SquareCertificateExact out;
    const long long cube = 1014LL * 1014LL * 1014LL;
    out.lhs = cube * 23LL;
    out.rhs = 24LL * 1000000000LL;
    out.holds = out.lhs < out.rhs;
    return out;
}

Vec2 sample_in_annulus(const Annulus& a, RngStream& rng) {
    if (a.norm == Norm::Round) {
        const double inner_sq = (1.0 - a.eps) * (1.0 - a.eps);
        const double rho = a.r * std::sqrt(rng.uniform01() * (1.0 - inner_sq) + inner_sq);
        const double theta = rng.uniform(0.0, 2.0 * kPi);
        return {rho * std::cos(theta), rho * std::sin(theta)};
    }
    // square annulus: two full-height side bands and two clipped top/bottom bands
    const double ro = a.r;
    const double ri = a.inner();
    const double side_band = (ro - ri) * 2.0 * ro;   // each of left/right
    const double cap_band = (ro - ri) * 2.0 * ri;    // each of top/bottom
    const double total = 2.0 * side_band + 2.0 * cap_band;
    double w = rng.uniform01() * total;
    if (w < side_band) return {rng.uniform(ri, ro), rng.uniform(-ro, ro)};
    w -= side_band;
    if (w < side_band) return {rng.uniform(-ro, -ri), rng.uniform(-ro, ro)};
    w -= side_band;
    if (w < cap_band) return {rng.uniform(-ri, ri), rng.uniform(ri, ro)};
    return {rng.uniform(-ri, ri), rng.uniform(-ro, -ri)};
}

}  // namespace annuperc
