#pragma once

#include <cstdint>
#include <vector>

#include "annuperc/pointfield.hpp"

namespace annuperc {

/// Union by size with path halving.
class DisjointSet {
  public:
    explicit DisjointSet(std::size_t n);

    std::uint32_t find(std::uint32_t i);
    bool unite(std::uint32_t a, std::uint32_t b);
    std::uint32_t size_of(std::uint32_t i) { return size_[find(i)]; }
    std::size_t component_count() const { return components_; }
    std::size_t element_count() const { return parent_.size(); }

  private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> size_;
    std::size_t components_ = 0;
};

/// Component structure of the annulus graph over a point field. Edges are
/// never materialized; the disjoint-set forest carries the partition and the
/// degree list is accumulated during the build pass.
class PercGraph {
  public:
    PercGraph(const PointField& field, const Annulus& a);

    const PointField& field() const { return *field_; }
    const Annulus& annulus() const { return annulus_; }
    std::uint32_t root(std::uint32_t i) const { return roots_[i]; }
    bool same_component(std::uint32_t i, std::uint32_t j) const { return roots_[i] == roots_[j]; }
    std::uint32_t degree(std::uint32_t i) const { return degree_[i]; }
    std::uint64_t edge_count() const { return edges_; }
    std::size_t component_count() const { return components_; }
    double mean_degree() const;

  private:
    const PointField* field_;
    Annulus annulus_;
    std::vector<std::uint32_t> roots_;   // finalized by a full find pass
    std::vector<std::uint32_t> degree_;
    std::uint64_t edges_ = 0;
    std::size_t components_ = 0;
};

struct ClusterStats {
    std::size_t component_count = 0;
    std::size_t largest = 0;
    double largest_fraction = 0.0;
    bool crossing_lr = false;
    bool crossing_bt = false;
    double mean_degree = 0.0;
};

/// Finite-box observables. Crossing flags mark a component holding one point
/// within edge_margin of each opposite box side; this is a finite-size
/// convention, only defined for hard boxes (throws under torus topology).
ClusterStats cluster_stats(const PercGraph& g, double edge_margin);

struct PathExpectation {
    // index k holds the estimate for induced paths of length k+1 (edges)
    std::vector<double> mean;
    std::vector<double> stderr_;
    std::uint64_t trials = 0;
    /// Delta-method standard error of mean[k+1]/mean[k] using the per-trial
    /// covariance between consecutive path counts.
    double ratio_stderr(int k) const;
    double ratio(int k) const { return mean[k + 1] / mean[k]; }

    // accumulated cross moments, internal to the estimator
    std::vector<double> sum, sum_sq, sum_cross;
};

/// Expected number of induced paths of a given length (counted in edges)
/// rooted at a fixed origin point of a fresh unit-intensity field. Counts are
/// exact per realization via depth-first enumeration; randomness is over
/// fields only. Guard: area(A) < 2 keeps the counts finite in practice.
PathExpectation induced_path_counts(const Annulus& a, int max_len, std::uint64_t trials,
                                    std::uint64_t seed);

/// Single-length convenience wrapper: estimate and standard error for E_n.
McEstimate induced_path_expectation(const Annulus& a, int n, std::uint64_t trials,
                                    std::uint64_t seed);

}  // namespace annuperc
