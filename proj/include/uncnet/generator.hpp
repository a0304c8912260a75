#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "uncnet/network.hpp"
#include "uncnet/rng.hpp"

namespace uncnet {

// Group prior and block connection probabilities of a stochastic block model.
struct BlockParams {
    std::uint32_t k = 0;
    std::vector<double> gamma;  // length k, sums to 1
    std::vector<double> omega;  // k*k row-major, symmetric, entries in [0,1]

    double om(std::uint32_t r, std::uint32_t s) const { return omega[r * k + s]; }
    double& om(std::uint32_t r, std::uint32_t s) { return omega[r * k + s]; }

    // Checks simplex/symmetry/range invariants; throws InvalidSimplexError or
    // InvalidBlockParamsError.
    static BlockParams validate(std::uint32_t k, std::vector<double> gamma,
                                std::vector<double> omega);

    // Two equal groups with within/between probabilities.
    static BlockParams two_group(double om_in, double om_out);
};

// Beta-noise parameters bound by the ratio constraint between the edge and
// non-edge observation densities: beta1 = Beta(a1,b1) for edges,
// beta0 = c * Beta(a0,b0) + (1-c) * delta(0) for non-edges, with a0 = a1-1,
// b0 = b1+1 and c matched so that a fraction Q of pairs observed at value Q
// are true edges.
struct NoiseSpec {
    double a1 = 0.0, b1 = 0.0;
    double a0 = 0.0, b0 = 0.0;
    double c = 0.0;
    double rho = 0.0;        // density these parameters were solved against
    bool noiseless = false;  // beta0 = delta(Q), beta1 = delta(Q-1): Q == A exactly

    static NoiseSpec exact();  // the noiseless limit
};

// How a benchmark requests its noise: either the exact limit, or (b1, rho)
// plus exactly one of a1 or c; the remaining parameters are solved.
struct NoiseRequest {
    double b1 = 0.0;
    std::optional<double> a1;
    std::optional<double> c;
    bool noiseless = false;
};

// Solves the constraint for the free coefficient. Exactly one of a1_opt/c_opt
// must be set. Throws InvalidShapeError for bad shapes (including solved
// a0 < 1e-6) and InfeasibleNoiseError when the implied c leaves (0,1].
NoiseSpec solve_noise(double b1, double rho, std::optional<double> a1_opt,
                      std::optional<double> c_opt);

// Max relative deviation of beta1(Q)/beta0(Q) from (Q/rho)/((1-Q)/(1-rho))
// over a grid of Q values; the solved spec keeps this below 1e-9.
double noise_consistency_error(const NoiseSpec& spec,
                               std::span<const double> q_grid = {});

struct PlantedInstance {
    UncertainNetwork network;
    Partition truth;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> truth_edges;  // i<j, sorted
    BlockParams params;
    NoiseSpec noise;
    std::uint64_t seed = 0;
};

// I.i.d. categorical group draws. Throws InvalidSimplexError.
Partition sample_partition(std::size_t n, std::span<const double> gamma, Rng& rng);

// Independent Bernoulli(omega_{g_i g_j}) edges, enumerated with geometric
// jumps so the cost is proportional to n plus the number of edges drawn.
// Returns pairs with i<j, sorted.
std::vector<std::pair<std::uint32_t, std::uint32_t>> sample_network(const Partition& partition,
                                                                    const BlockParams& params,
                                                                    Rng& rng);

// Replaces edges/non-edges by probabilities drawn from the noise densities.
// Non-edge count is binomial and pairs are sampled uniformly without
// replacement, so cost is proportional to the output size.
UncertainNetwork apply_noise(std::span<const std::pair<std::uint32_t, std::uint32_t>> edges,
                             std::size_t n, const NoiseSpec& noise, Rng& rng);

// Full pipeline: partition -> edges -> noisy probabilities. Reproducible
// bit-for-bit from the seed.
PlantedInstance generate_benchmark(std::size_t n, const BlockParams& params,
                                   const NoiseRequest& request, std::uint64_t seed);

} // namespace uncnet
