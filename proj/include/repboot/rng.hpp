#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace repboot {

// Deterministic random source (xoshiro256++ seeded via splitmix64).
//
// Every stochastic step in the library draws from an Rng constructed from an
// explicit (seed, stream) pair, so results are reproducible bit-for-bit and
// independent units (trees, compositions, permutation repeats) can run in any
// order or thread without changing the outcome. The standard <random>
// distributions are avoided on purpose: their output is implementation
// defined, ours is pinned.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    // Child generator for an independent unit of work.
    Rng substream(std::uint64_t id) const { return Rng(root_seed_, mix(stream_, id)); }

    std::uint64_t next_u64();

    // Uniform in [0, 1) with 53 random bits.
    double next_double();

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);

    // Standard normal via Box-Muller (second value cached).
    double normal();

    // Gamma(shape, 1) via Marsaglia-Tsang, shape > 0.
    double gamma(double shape);

    // Beta(a, b) from two gamma draws.
    double beta(double a, double b);

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b);

    std::uint64_t root_seed_;
    std::uint64_t stream_;
    std::uint64_t state_[4];
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

}  // namespace repboot
