#pragma once

#include <cmath>
#include <cstdint>

namespace lambdaflow {

// Counter-based generator: every draw is a pure function of (seed, counter,
// stream), so a sample sequence is reproducible regardless of how the samples
// are distributed over threads.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t bits(std::uint64_t counter, std::uint64_t stream) const {
        std::uint64_t z = seed_ + 0x9E3779B97F4A7C15ull * (counter + 1) +
                          0xBF58476D1CE4E5B9ull * (stream + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in the open interval (0, 1).
    double uniform(std::uint64_t counter, std::uint64_t stream) const {
        return (static_cast<double>(bits(counter, stream) >> 11) + 0.5) * 0x1p-53;
    }

    /// Standard normal via Box-Muller; one value per (counter, stream).
    double normal(std::uint64_t counter, std::uint64_t stream) const {
        const double u1 = uniform(counter, 2 * stream);
        const double u2 = uniform(counter, 2 * stream + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

  private:
    std::uint64_t seed_;
};

}  // namespace lambdaflow
