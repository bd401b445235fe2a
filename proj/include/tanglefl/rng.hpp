#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace tanglefl {

/// Deterministic random stream. Distinct (seed, stream) pairs yield
/// independent sequences; every client, the scheduler and the evaluation
/// sampler get their own stream so execution order cannot perturb results.
/// All distributions are hand-rolled on top of mt19937_64 so the produced
/// values are identical on every platform and standard library.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform01();

    /// Unbiased uniform integer in [0, n). n must be nonzero.
    std::uint64_t uniform_below(std::uint64_t n);

    /// Standard normal via Box-Muller (second value cached).
    double normal();

    /// Index drawn proportionally to the given nonnegative weights.
    std::size_t weighted_choice(std::span<const double> weights);

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[uniform_below(i)]);
        }
    }

    /// k distinct values from [0, n), returned sorted ascending.
    std::vector<std::uint64_t> sample_without_replacement(std::uint64_t n, std::uint64_t k);

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace tanglefl
