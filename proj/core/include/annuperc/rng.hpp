#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace annuperc {

/// Deterministic random stream (xoshiro256++ seeded through splitmix64).
///
/// Experiments derive one independent stream per (master seed, label, index)
/// triple, so results do not depend on scheduling order, and replay from a
/// recorded seed is bit-identical on a given platform. Distribution samplers
/// are implemented here rather than taken from <random> because libstdc++ and
/// libc++ disagree on the draw sequences.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed);
    RngStream(std::uint64_t master, std::string_view label, std::uint64_t index = 0);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1).
    double uniform01();
    /// Uniform double in [a, b).
    double uniform(double a, double b);
    /// Unbiased uniform integer in [0, n).
    std::uint64_t uniform_below(std::uint64_t n);

    /// Poisson draw; inversion below mean 30, PTRS transformed rejection above.
    long long poisson(double mean);

    /// Keeps the first k entries of v a uniform k-subset (partial Fisher-Yates).
    template <typename T>
    void partial_shuffle(std::vector<T>& v, std::size_t k) {
        const std::size_t m = v.size();
        if (k >= m) return;
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t j = i + static_cast<std::size_t>(uniform_below(m - i));
            std::swap(v[i], v[j]);
        }
    }

  private:
    std::array<std::uint64_t, 4> s_{};
};

}  // namespace annuperc
