#pragma once

#include <cstdint>
#include <random>

namespace uncnet {

// Seedable random generator with portable output. The engine (std::mt19937_64)
// is bit-exact across platforms by the standard; the distributions below are
// implemented here because the std::*_distribution classes are not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    // Standard normal via Box-Muller (one value per call; two uniforms consumed).
    double normal();

    // Gamma(shape, 1) via Marsaglia-Tsang, with the u^(1/a) boost for shape < 1.
    double gamma(double shape);

    double beta(double a, double b);

    // Exact Binomial(n, p) draw. Cost grows with n*min(p, 1-p), which is fine
    // for the generator's use (counts of noisy non-edge pairs).
    std::uint64_t binomial(std::uint64_t n, double p);

    // Number of failures before the first success for success probability p.
    // Returns UINT64_MAX when p == 0.
    std::uint64_t geometric(double p);

    // Deterministically derived child generator for parallel work items.
    Rng spawn(std::uint64_t stream) const;

private:
    std::mt19937_64 engine_;
};

// SplitMix64 step; used for seed derivation.
std::uint64_t splitmix64(std::uint64_t& state);

// Deterministic child seed for work item `stream` under a root seed.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
    std::uint64_t s = root ^ (0x9e3779b97f4a7c15ULL * (stream + 0x61c88647ULL));
    return splitmix64(s);
}

} // namespace uncnet
