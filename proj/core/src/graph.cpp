#include "annuperc/graph.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace annuperc {

DisjointSet::DisjointSet(std::size_t n)
    : parent_(n), size_(n, 1), components_(n) {
    for (std::size_t i = 0; i < n; ++i) parent_[i] = static_cast<std::uint32_t>(i);
}

std::uint32_t DisjointSet::find(std::uint32_t i) {
    while (i != parent_[i]) {
        parent_[i] = parent_[parent_[i]];
        i = parent_[i];
    }
    return i;
}

bool DisjointSet::unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    --components_;
    return true;
}

PercGraph::PercGraph(const PointField& field, const Annulus& a)
    : field_(&field), annulus_(a) {
    const std::size_t n = field.size();
    DisjointSet dsu(n);
    degree_.assign(n, 0);
    std::vector<std::uint32_t> nbrs;
    for (std::uint32_t i = 0; i < n; ++i) {
        field.annulus_neighbors(field.point(i), a, nbrs);
        for (std::uint32_t j : nbrs) {
            if (j <= i) continue;  // each unordered pair once
            dsu.unite(i, j);
            ++degree_[i];
            ++degree_[j];
            ++edges_;
        }
    }
    roots_.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) roots_[i] = dsu.find(i);
    components_ = dsu.component_count();
}

double PercGraph::mean_degree() const {
    if (degree_.empty()) return 0.0;
    return 2.0 * static_cast<double>(edges_) / static_cast<double>(degree_.size());
}

ClusterStats cluster_stats(const PercGraph& g, double edge_margin) {
    const PointField& f = g.field();
    if (f.box().topology == Topology::Torus)
        throw std::invalid_argument("cluster_stats: crossing flags undefined on a torus");
    ClusterStats out;
    out.component_count = g.component_count();
    out.mean_degree = g.mean_degree();
    const std::size_t n = f.size();
    if (n == 0) return out;

    const Box& box = f.box();
    const double xl = box.origin.x + edge_margin;
    const double xr = box.origin.x + box.width - edge_margin;
    const double yb = box.origin.y + edge_margin;
    const double yt = box.origin.y + box.height - edge_margin;

    struct Flags {
        std::uint32_t count = 0;
        bool left = false, right = false, bottom = false, top = false;
    };
    std::unordered_map<std::uint32_t, Flags> by_root;
    by_root.reserve(n / 4 + 1);
    for (std::uint32_t i = 0; i < n; ++i) {
        Flags& fl = by_root[g.root(i)];
        Vec2 p = f.point(i);
        ++fl.count;
        fl.left |= p.x <= xl;
        fl.right |= p.x >= xr;
        fl.bottom |= p.y <= yb;
        fl.top |= p.y >= yt;
    }
    for (const auto& [root, fl] : by_root) {
        out.largest = std::max<std::size_t>(out.largest, fl.count);
        out.crossing_lr |= fl.left && fl.right;
        out.crossing_bt |= fl.bottom && fl.top;
    }
    out.largest_fraction = static_cast<double>(out.largest) / static_cast<double>(n);
    return out;
}

double PathExpectation::ratio_stderr(int k) const {
    const double n = static_cast<double>(trials);
    const double ma = mean[k], mb = mean[k + 1];
    if (ma <= 0.0) return 0.0;
    const double va = sum_sq[k] / n - ma * ma;
    const double vb = sum_sq[k + 1] / n - mb * mb;
    const double cab = sum_cross[k] / n - ma * mb;
    const double rel = vb / (mb * mb) + va / (ma * ma) - 2.0 * cab / (ma * mb);
    const double r = mb / ma;
    return std::fabs(r) * std::sqrt(std::max(0.0, rel) / n);
}

namespace {

struct PathCounter {
    const PointField* field;
    const Annulus* annulus;
    int max_len;
    std::vector<double>* counts;     // counts[k] for paths with k+1 edges
    std::vector<Vec2> path;          // includes the root
    std::vector<std::uint32_t> nbrs;

    // extends the induced path whose last vertex sits at `last`
    void extend(Vec2 last, int edges_so_far) {
        if (edges_so_far == max_len) return;
        field->annulus_neighbors(last, *annulus, nbrs);
        std::vector<std::uint32_t> local(nbrs);
        for (std::uint32_t idx : local) {
            Vec2 cand = field->point(idx);
            // induced: the new vertex must be fresh and may touch only the
            // current endpoint (identity check matters for eps < 1, where a
            // zero displacement lies outside the annulus)
            bool ok = true;
            for (std::size_t q = 0; q + 1 < path.size(); ++q) {
                if (cand == path[q] || annulus->contains(cand - path[q])) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            (*counts)[edges_so_far] += 1.0;
            path.push_back(cand);
            extend(cand, edges_so_far + 1);
            path.pop_back();
        }
    }
};

}  // namespace

PathExpectation induced_path_counts(const Annulus& a, int max_len, std::uint64_t trials,
                                    std::uint64_t seed) {
    if (max_len < 1) throw std::invalid_argument("induced_path_counts: need length >= 1");
    if (trials == 0) throw std::invalid_argument("induced_path_counts: need trials");
    if (!(a.area() < 2.0))
        throw std::invalid_argument("induced_path_counts: area(A) must stay below 2");

    // fresh field per trial, large enough to hold any path of max_len steps
    const double half = (max_len + 1) * a.r;
    const Box box{{-half, -half}, 2.0 * half, 2.0 * half, Topology::Hard};

    PathExpectation out;
    out.trials = trials;
    out.sum.assign(max_len, 0.0);
    out.sum_sq.assign(max_len, 0.0);
    out.sum_cross.assign(max_len > 1 ? max_len - 1 : 0, 0.0);

    std::vector<double> counts(max_len);
    for (std::uint64_t t = 0; t < trials; ++t) {
        RngStream trial_rng(seed, "induced-path", t);
        PointField f = PointField::sample_poisson(box, 1.0, a.r, trial_rng.next_u64());
        std::fill(counts.begin(), counts.end(), 0.0);
        PathCounter pc{&f, &a, max_len, &counts, {{0.0, 0.0}}, {}};
        pc.extend({0.0, 0.0}, 0);
        for (int k = 0; k < max_len; ++k) {
            out.sum[k] += counts[k];
            out.sum_sq[k] += counts[k] * counts[k];
            if (k + 1 < max_len) out.sum_cross[k] += counts[k] * counts[k + 1];
        }
    }
    const double n = static_cast<double>(trials);
    out.mean.resize(max_len);
    out.stderr_.resize(max_len);
    for (int k = 0; k < max_len; ++k) {
        out.mean[k] = out.sum[k] / n;
        double var = std::max(0.0, out.sum_sq[k] / n - out.mean[k] * out.mean[k]);
        out.stderr_[k] = std::sqrt(var / n);
    }
    return out;
}

McEstimate induced_path_expectation(const Annulus& a, int n, std::uint64_t trials,
                                    std::uint64_t seed) {
    PathExpectation pe = induced_path_counts(a, n, trials, seed);
    return {pe.mean[n - 1], pe.stderr_[n - 1], trials};
}

}  // namespace annuperc
