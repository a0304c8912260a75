#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "uncnet/bp.hpp"
#include "uncnet/generator.hpp"
#include "uncnet/network.hpp"

namespace uncnet {

// Exact posterior over all k^n assignments of a tiny instance.
// Assignments are indexed lexicographically: g_0 is the most significant
// base-k digit.
struct PosteriorTable {
    std::uint32_t k = 0;
    std::size_t n = 0;
    std::vector<double> posterior;        // k^n
    double log_marginal_likelihood = 0.0; // log sum_g P(Q,g)
    std::vector<double> node_marginals;   // n*k
    std::vector<double> pair_marginals;   // all i<j pairs (lexicographic) * k * k

    std::size_t pair_index(std::uint32_t i, std::uint32_t j) const; // i < j
    const double* pair_table(std::uint32_t i, std::uint32_t j) const;
};

// log P(Q, g | gamma, omega) up to the constant factor the likelihood drops;
// the product runs over ALL pairs, with absent pairs contributing
// (1 - omega)/(1 - rho).
double joint_log_likelihood(const UncertainNetwork& net, std::span<const std::uint32_t> g,
                            const BlockParams& params, BlockModelKind kind,
                            const DegreeVector& degrees, double rho);

// Enumerates every assignment (guard: k^n <= 2^24, else InstanceTooLargeError),
// in log space with a max shift.
PosteriorTable enumerate_posterior(const UncertainNetwork& net, std::uint32_t k,
                                   const BlockParams& params, BlockModelKind kind,
                                   const DegreeVector& degrees, double rho);

// Reference marginals for the model the leading-order belief propagation
// actually solves: pairwise bracket factors on stored pairs only, with the
// absent pairs folded into a self-consistent external field
// exp(-d_i sum_s omega_rs sum_k d_k mu_s^k). Solved by fixed-point iteration
// of exact enumeration; independent of the message-passing implementation.
struct FieldReference {
    std::vector<double> node_marginals;  // n*k
    std::vector<double> pair_marginals;  // stored pairs * k * k
    bool converged = false;
    int iterations = 0;
};

FieldReference solve_field_reference(const UncertainNetwork& net, std::uint32_t k,
                                     const BlockParams& params, BlockModelKind kind,
                                     const DegreeVector& degrees, double rho, double tol = 1e-13,
                                     int max_iters = 1000);

// Cavity marginal of node `target` when node `removed` is deleted, under the
// same field-consistent model with the field taken from `field_marginals`
// (the full-system marginals). Equals the BP message target->removed on trees.
std::vector<double> cavity_marginal(const UncertainNetwork& net, std::uint32_t k,
                                    const BlockParams& params, BlockModelKind kind,
                                    const DegreeVector& degrees, double rho,
                                    std::span<const double> field_marginals, std::uint32_t target,
                                    std::uint32_t removed);

// EM with the exact posterior as the E-step and the exact (non-factorized)
// denominator in the omega update. Plain mode only; the exact-coordinate
// ascent argument guarantees a non-decreasing log marginal likelihood.
struct OracleEmResult {
    BlockParams params;
    std::vector<double> loglik_trace;  // exact log marginal likelihood per E-step
    PosteriorTable posterior;          // at the final parameters
};

OracleEmResult oracle_em(const UncertainNetwork& net, std::uint32_t k, BlockParams init,
                         int max_iters, double inner_tol = 1e-12, int inner_iters = 500);

} // namespace uncnet
