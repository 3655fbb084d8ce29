#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "annuperc/rng.hpp"
#include "annuperc/vec2.hpp"

namespace annuperc {

enum class Norm { Round, Square };

/// Annular connection region: displacements v with r(1-eps) <= ||v|| <= r,
/// in the L2 (Round) or Linf (Square) norm. 0 < eps <= 1; eps == 1 degenerates
/// to a full disk / square.
struct Annulus {
    Norm norm = Norm::Round;
    double r = 1.0;
    double eps = 1.0;

    Annulus(Norm n, double outer_radius, double thinness);

    double inner() const { return r * (1.0 - eps); }

    /// Closed form: pi r^2 eps(2-eps) round, 4 r^2 eps(2-eps) square.
    double area() const;

    /// Membership with closed inequalities on both boundaries.
    bool contains(Vec2 v) const;
};

struct OverlapReport {
    enum class Method { Exact, MonteCarlo };
    double d = 0.0;         // center separation
    double area = 0.0;      // overlap area
    Method method = Method::Exact;
    double mc_stderr = 0.0; // 0 for exact
};

/// Area of the lens formed by two disks of radii r1, r2 with centers d apart.
double lens_area(double r1, double r2, double d);

/// Exact overlap of two congruent annuli whose centers differ by v.
/// Inclusion-exclusion over the four outer/inner shape pairs.
double overlap_area(const Annulus& a, Vec2 v);

/// Overlap at separation d. For the square norm the displacement convention
/// is (d, 0); by the dihedral symmetry of the square this covers the
/// axis-aligned worst cases.
OverlapReport intersection_area(const Annulus& a, double d);

/// Hit-or-miss estimate of the same overlap: sample uniformly in the annulus
/// at the origin and test membership in the annulus shifted by (d, 0).
/// Shares only the membership predicate with the exact kernel.
OverlapReport intersection_area_mc(const Annulus& a, double d, std::uint64_t samples,
                                   RngStream& rng);

struct RatioExtremum {
    double ratio = 0.0;  // extremal value of the scanned ratio
    double d = 0.0;      // separation achieving it
};

/// Minimum of overlap/area(A) over d in [r(1-eps), r]: uniform grid plus one
/// golden-section refinement around the best grid point.
RatioExtremum min_overlap_ratio(const Annulus& a, int grid_steps);

/// Supremum of overlap/(area(A) sqrt(eps)) over d in [d_min, 2r], same scan.
/// Requires d_min >= r sqrt(eps).
RatioExtremum sup_overlap_scaled(const Annulus& a, double d_min, int grid_steps);

/// Monte Carlo estimate of |A_i ∩ ⋃_{j≠i}(A_j ∪ B_j)| where A_j is the annulus
/// at centers[j] and B_j the norm ball of radius r sqrt(eps) around it.
/// Throws if any two centers are closer than r sqrt(eps).
OverlapReport cluster_overlap_area(const Annulus& a, std::span<const Vec2> centers,
                                   std::size_t i, std::uint64_t samples, RngStream& rng);

struct IntervalOverlap {
    double closed_form = 0.0;  // (2/3) c^3
    double quadrature = 0.0;   // 2-D midpoint rule estimate
};

/// Self-convolution identity for an interval of length c:
/// integral over [0,c]^2 of |(x+I) ∩ (y+I)| equals (2/3) c^3.
IntervalOverlap interval_overlap_integral(double c, int grid = 2048);

struct McEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::uint64_t samples = 0;
};

/// Subcriticality certificate for a symmetric region A:
/// |A|^3 - integral over A x A of |(x+A) ∩ (y+A)|, estimated by sampling the
/// integral with the exact pairwise kernel. Values below 1 certify almost-sure
/// absence of an infinite component.
McEstimate subcritical_certificate(const Annulus& a, std::uint64_t samples, RngStream& rng);

/// Monte Carlo estimate of the raw pair integral over A x A of |(x+A) ∩ (y+A)|.
McEstimate pair_overlap_integral_mc(const Annulus& a, std::uint64_t samples, RngStream& rng);

/// Rigorous lower bound on the critical area of the round annulus: 1 + eps/(pi sqrt(3)).
double lower_bound_nc(double eps);

/// eps/(pi sqrt(3)): guaranteed overlap fraction for joined round-annulus centers.
double overlap_lower_bound_ratio(double eps);

/// Exact-integer check that 1.014^3 * (23/24) < 1, i.e. 1014^3 * 23 < 24 * 10^9.
struct SquareCertificateExact {
    long long lhs = 0;
    long long rhs = 0;
    bool holds = false;
};
SquareCertificateExact square_annulus_exact_certificate();

/// Uniform sample in the annulus. Round: polar inversion, rejection-free.
/// Square: area-weighted choice among the four boundary bands.
Vec2 sample_in_annulus(const Annulus& a, RngStream& rng);

}  // namespace annuperc
