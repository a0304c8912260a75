#include "uncnet/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace uncnet {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    // Rejection sampling over the largest multiple of n.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

double Rng::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

double Rng::gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("Rng::gamma: shape must be positive");
    if (shape < 1.0) {
        const double g = gamma(shape + 1.0);
        double u = uniform();
        while (u <= 0.0) u = uniform();
        return g * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double Rng::beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    if (x + y == 0.0) return 0.5;
    return x / (x + y);
}

std::uint64_t Rng::binomial(std::uint64_t n, double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("Rng::binomial: p out of range");
    if (n == 0 || p == 0.0) return 0;
    if (p == 1.0) return n;
    if (p > 0.5) return n - binomial(n, 1.0 - p);
    // Count successes by jumping between them with geometric gaps.
    std::uint64_t count = 0;
    std::uint64_t pos = 0;
    for (;;) {
        const std::uint64_t gap = geometric(p);
        if (gap >= n - pos) break;
        pos += gap + 1;
        ++count;
        if (pos >= n) break;
    }
    return count;
}

std::uint64_t Rng::geometric(double p) {
    if (p <= 0.0) return std::numeric_limits<std::uint64_t>::max();
    if (p >= 1.0) return 0;
    double u = uniform();
    while (u <= 0.0) u = uniform();
    const double g = std::floor(std::log(u) / std::log1p(-p));
    if (g >= 1.8446744073709552e19) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(g);
}

Rng Rng::spawn(std::uint64_t stream) const {
    // Hash the engine's notional identity with the stream id. The engine state
    // itself is not observable, so use a fresh draw from a copy.
    std::mt19937_64 probe = engine_;
    std::uint64_t s = probe() ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    return Rng(splitmix64(s));
}

} // namespace uncnet
