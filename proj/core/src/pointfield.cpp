#include "annuperc/pointfield.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace annuperc {

Vec2 Box::min_image(Vec2 delta) const {
    if (topology == Topology::Hard) return delta;
    delta.x -= width * std::round(delta.x / width);
    delta.y -= height * std::round(delta.y / height);
    return delta;
}

PointField PointField::sample_poisson(const Box& box, double intensity, double cell_size,
                                      std::uint64_t seed) {
    if (!(box.width > 0.0) || !(box.height > 0.0))
        throw std::invalid_argument("sample_poisson: box must have positive extent");
    if (!(intensity > 0.0)) throw std::invalid_argument("sample_poisson: intensity must be positive");
    if (!(cell_size > 0.0)) throw std::invalid_argument("sample_poisson: cell_size must be positive");

    RngStream rng(seed, "pointfield");
    PointField f;
    f.box_ = box;
    f.cell_size_ = cell_size;
    f.intensity_ = intensity;
    f.seed_ = seed;
    const long long n = rng.poisson(intensity * box.area());
    f.pts_.reserve(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
        double x = box.origin.x + box.width * rng.uniform01();
        double y = box.origin.y + box.height * rng.uniform01();
        f.pts_.push_back({x, y});
    }
    f.build_index();
    return f;
}

PointField PointField::from_points(const Box& box, std::vector<Vec2> points, double cell_size) {
    if (!(cell_size > 0.0)) throw std::invalid_argument("from_points: cell_size must be positive");
    for (const Vec2& p : points)
        if (!box.contains(p)) throw std::invalid_argument("from_points: point outside box");
    PointField f;
    f.box_ = box;
    f.cell_size_ = cell_size;
    f.pts_ = std::move(points);
    f.build_index();
    return f;
}

void PointField::build_index() {
    nx_ = std::max(1, static_cast<int>(std::ceil(box_.width / cell_size_)));
    ny_ = std::max(1, static_cast<int>(std::ceil(box_.height / cell_size_)));
    const std::size_t ncells = static_cast<std::size_t>(nx_) * ny_;
    std::vector<std::uint32_t> counts(ncells, 0);
    auto cell_index = [&](Vec2 p) {
        int cx, cy;
        cell_of(p, cx, cy);
        return static_cast<std::size_t>(cy) * nx_ + cx;
    };
    for (const Vec2& p : pts_) ++counts[cell_index(p)];
    cell_start_.assign(ncells + 1, 0);
    for (std::size_t c = 0; c < ncells; ++c) cell_start_[c + 1] = cell_start_[c] + counts[c];
    cell_items_.resize(pts_.size());
    std::vector<std::uint32_t> cursor(cell_start_.begin(), cell_start_.end() - 1);
    for (std::uint32_t i = 0; i < pts_.size(); ++i)
        cell_items_[cursor[cell_index(pts_[i])]++] = i;
}

void PointField::cell_of(Vec2 p, int& cx, int& cy) const {
    cx = static_cast<int>(std::floor((p.x - box_.origin.x) / cell_size_));
    cy = static_cast<int>(std::floor((p.y - box_.origin.y) / cell_size_));
    cx = std::clamp(cx, 0, nx_ - 1);
    cy = std::clamp(cy, 0, ny_ - 1);
}

std::span<const std::uint32_t> PointField::cell_points(int cx, int cy) const {
    const std::size_t c = static_cast<std::size_t>(cy) * nx_ + cx;
    return {cell_items_.data() + cell_start_[c],
            cell_items_.data() + cell_start_[c + 1]};
}

void PointField::annulus_neighbors(Vec2 center, const Annulus& a,
                                   std::vector<std::uint32_t>& out) const {
    out.clear();
    if (pts_.empty()) return;
    const bool torus = box_.topology == Topology::Torus;
    if (torus && 2.0 * a.r > std::min(box_.width, box_.height))
        throw std::invalid_argument("annulus_neighbors: torus box too small for query radius");

    const int reach = static_cast<int>(std::ceil(a.r / cell_size_));
    int cx0 = static_cast<int>(std::floor((center.x - box_.origin.x) / cell_size_));
    int cy0 = static_cast<int>(std::floor((center.y - box_.origin.y) / cell_size_));
    for (int dy = -reach; dy <= reach; ++dy) {
        for (int dx = -reach; dx <= reach; ++dx) {
            int cx = cx0 + dx;
            int cy = cy0 + dy;
            if (torus) {
                cx = ((cx % nx_) + nx_) % nx_;
                cy = ((cy % ny_) + ny_) % ny_;
            } else if (cx < 0 || cx >= nx_ || cy < 0 || cy >= ny_) {
                continue;
            }
            for (std::uint32_t idx : cell_points(cx, cy)) {
                Vec2 delta = box_.min_image(pts_[idx] - center);
                if ((delta.x != 0.0 || delta.y != 0.0) && a.contains(delta)) out.push_back(idx);
            }
        }
    }
}

std::vector<std::uint32_t> PointField::annulus_neighbors(Vec2 center, const Annulus& a) const {
    std::vector<std::uint32_t> out;
    annulus_neighbors(center, a, out);
    return out;
}

void PointField::save_csv(std::ostream& os) const {
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "# pointfield v1 seed=%llu intensity=%.17g cell=%.17g topology=%d\n",
                  static_cast<unsigned long long>(seed_), intensity_, cell_size_,
                  box_.topology == Topology::Torus ? 1 : 0);
    os << buf;
    std::snprintf(buf, sizeof buf, "# box origin=%.17g,%.17g width=%.17g height=%.17g\n",
                  box_.origin.x, box_.origin.y, box_.width, box_.height);
    os << buf;
    os << "x,y\n";
    for (const Vec2& p : pts_) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.x, p.y);
        os << buf;
    }
}

PointField PointField::load_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# pointfield v1", 0) != 0)
        throw std::runtime_error("load_csv: missing pointfield header");
    unsigned long long seed = 0;
    double intensity = 0.0, cell = 1.0;
    int topo = 0;
    if (std::sscanf(line.c_str(), "# pointfield v1 seed=%llu intensity=%lg cell=%lg topology=%d",
                    &seed, &intensity, &cell, &topo) != 4)
        throw std::runtime_error("load_csv: malformed header");
    if (!std::getline(is, line)) throw std::runtime_error("load_csv: missing box header");
    Box box;
    if (std::sscanf(line.c_str(), "# box origin=%lg,%lg width=%lg height=%lg", &box.origin.x,
                    &box.origin.y, &box.width, &box.height) != 4)
        throw std::runtime_error("load_csv: malformed box header");
    box.topology = topo ? Topology::Torus : Topology::Hard;
    std::getline(is, line);  // column names
    std::vector<Vec2> pts;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        Vec2 p;
        if (std::sscanf(line.c_str(), "%lg,%lg", &p.x, &p.y) != 2)
            throw std::runtime_error("load_csv: malformed row");
        pts.push_back(p);
    }
    PointField f = from_points(box, std::move(pts), cell);
    f.seed_ = seed;
    f.intensity_ = intensity;
    return f;
}

TestedRegion::TestedRegion(const Annulus& a, double ball_radius)
    : annulus_(a), ball_radius_(ball_radius), cell_(a.r) {
    if (!(ball_radius >= 0.0)) throw std::invalid_argument("TestedRegion: negative ball radius");
    if (ball_radius > a.r) cell_ = ball_radius;
}

std::int64_t TestedRegion::key_of(Vec2 p) const {
    const std::int64_t ix = static_cast<std::int64_t>(std::floor(p.x / cell_));
    const std::int64_t iy = static_cast<std::int64_t>(std::floor(p.y / cell_));
    return (ix << 32) ^ (iy & 0xffffffffLL);
}

void TestedRegion::add(Vec2 z) {
    const std::uint32_t idx = static_cast<std::uint32_t>(centers_.size());
    centers_.push_back(z);
    grid_[key_of(z)].push_back(idx);
}

template <typename Pred>
bool TestedRegion::scan(Vec2 p, Pred&& pred) const {
    const std::int64_t ix = static_cast<std::int64_t>(std::floor(p.x / cell_));
    const std::int64_t iy = static_cast<std::int64_t>(std::floor(p.y / cell_));
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            auto it = grid_.find(((ix + dx) << 32) ^ ((iy + dy) & 0xffffffffLL));
            if (it == grid_.end()) continue;
            for (std::uint32_t idx : it->second)
                if (pred(centers_[idx])) return true;
        }
    }
    return false;
}

bool TestedRegion::covered_by_ball(Vec2 p) const {
    return scan(p, [&](Vec2 z) {
        Vec2 d = p - z;
        double dist = annulus_.norm == Norm::Round ? norm2(d) : norm_inf(d);
        return dist <= ball_radius_;
    });
}

bool TestedRegion::covered_by_annulus(Vec2 p, const Vec2* exempt) const {
    return scan(p, [&](Vec2 z) {
        if (exempt && z == *exempt) return false;
        return annulus_.contains(p - z);
    });
}

bool TestedRegion::query(Vec2 p) const {
    return covered_by_ball(p) || covered_by_annulus(p);
}

}  // namespace annuperc
