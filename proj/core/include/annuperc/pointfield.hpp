#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "annuperc/geometry.hpp"
#include "annuperc/rng.hpp"
#include "annuperc/vec2.hpp"

namespace annuperc {

enum class Topology { Hard, Torus };

struct Box {
    Vec2 origin{0.0, 0.0};
    double width = 1.0;
    double height = 1.0;
    Topology topology = Topology::Hard;

    double area() const { return width * height; }
    bool contains(Vec2 p) const {
        return p.x >= origin.x && p.x <= origin.x + width && p.y >= origin.y &&
               p.y <= origin.y + height;
    }
    /// Box grown by `margin` on all sides (boundary-safe sampling).
    Box expanded(double margin) const {
        return {{origin.x - margin, origin.y - margin}, width + 2.0 * margin,
                height + 2.0 * margin, topology};
    }
    /// Minimum-image displacement under the torus; identity for hard boxes.
    Vec2 min_image(Vec2 delta) const;
};

/// A realized Poisson point set with a uniform grid index for annulus range
/// queries. Immutable after construction; concurrent reads are safe.
class PointField {
  public:
    /// N ~ Poisson(intensity * |box|) points i.i.d. uniform in the box.
    /// The (seed, parameters) pair replays bit-identically.
    static PointField sample_poisson(const Box& box, double intensity, double cell_size,
                                     std::uint64_t seed);

    /// Index an explicit point set (tests, replay filters).
    static PointField from_points(const Box& box, std::vector<Vec2> points, double cell_size);

    const Box& box() const { return box_; }
    std::span<const Vec2> points() const { return pts_; }
    Vec2 point(std::uint32_t i) const { return pts_[i]; }
    std::size_t size() const { return pts_.size(); }
    double cell_size() const { return cell_size_; }
    std::uint64_t seed() const { return seed_; }
    double intensity() const { return intensity_; }

    /// Indices of points p != center with p - center in the annulus
    /// (minimum-image displacement under torus topology). Centers outside the
    /// box are allowed and see in-box neighbors only.
    void annulus_neighbors(Vec2 center, const Annulus& a, std::vector<std::uint32_t>& out) const;
    std::vector<std::uint32_t> annulus_neighbors(Vec2 center, const Annulus& a) const;

    /// CSV serialization: header line with seed/intensity/box, then x,y rows.
    void save_csv(std::ostream& os) const;
    static PointField load_csv(std::istream& is);

    // index introspection for invariant tests
    int grid_nx() const { return nx_; }
    int grid_ny() const { return ny_; }
    std::span<const std::uint32_t> cell_points(int cx, int cy) const;
    void cell_of(Vec2 p, int& cx, int& cy) const;

  private:
    PointField() = default;
    void build_index();

    Box box_;
    double cell_size_ = 1.0;
    double intensity_ = 0.0;
    std::uint64_t seed_ = 0;
    int nx_ = 0, ny_ = 0;
    std::vector<Vec2> pts_;
    std::vector<std::uint32_t> cell_start_;  // CSR offsets, size nx*ny+1
    std::vector<std::uint32_t> cell_items_;  // point indices grouped by cell
};

/// Union of annuli and norm balls around registered centers, with a coarse
/// hash grid for O(1) candidate lookup. Mutation requires exclusive access;
/// queries between mutations are safe to run concurrently.
class TestedRegion {
  public:
    TestedRegion(const Annulus& a, double ball_radius);

    /// Registers z as both an annulus center and a ball center.
    void add(Vec2 z);

    /// True iff p lies in some registered annulus or ball.
    bool query(Vec2 p) const;

    bool covered_by_ball(Vec2 p) const;
    /// Annulus coverage; a center equal to `exempt` (exact coordinates) is skipped.
    bool covered_by_annulus(Vec2 p, const Vec2* exempt = nullptr) const;

    std::span<const Vec2> centers_annuli() const { return centers_; }
    std::span<const Vec2> centers_balls() const { return centers_; }
    double ball_radius() const { return ball_radius_; }

  private:
    std::int64_t key_of(Vec2 p) const;
    template <typename Pred>
    bool scan(Vec2 p, Pred&& pred) const;

    Annulus annulus_;
    double ball_radius_;
    double cell_;
    std::vector<Vec2> centers_;
    std::unordered_map<std::int64_t, std::vector<std::uint32_t>> grid_;
};

}  // namespace annuperc
