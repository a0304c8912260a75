#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uncnet/bp.hpp"
#include "uncnet/generator.hpp"
#include "uncnet/network.hpp"

namespace uncnet {

struct EmOptions {
    int restarts = 10;
    std::uint64_t seed = 0;
    double tol_em = 1e-6;
    double tol_bp = 1e-6;
    double tol_inner = 1e-8;
    int max_iters = 200;
    int bp_max_sweeps = 100;
    int inner_max_iters = 200;
    double damping = 0.0;
    int threads = 0;  // 0: UNCNET_THREADS env or hardware concurrency
};

struct FitResult {
    BlockParams params;
    Marginals marginals;
    std::vector<double> t;  // pair_count*k*k posterior edge probability tables
    std::vector<double> bound_trace;
    Partition hard_partition;
    int restarts_used = 0;
    bool converged = false;
    std::uint64_t seed = 0;
    double bound = 0.0;  // Bethe bound of the selected restart
    double rho = 0.0;
    BlockModelKind kind = BlockModelKind::plain;
    std::vector<std::string> warnings;
};

// Posterior probability of an edge given the pair's groups:
//   t = q*w/rho / (q*w/rho + (1-q)(1-w)/(1-rho)),  w = min(dd*omega_rs, 1-1e-9).
// Throws DegenerateRhoError for rho outside (0,1).
double compute_t(double q, double omega_rs, double rho, double dd = 1.0);

// gamma_r = (1/n) sum_i q_r^i.
std::vector<double> update_gamma(const std::vector<double>& node_marginals, std::size_t n,
                                 std::uint32_t k);

// Inner t/omega fixed point with the factorized denominator
// sum_i w_i q_r^i * sum_j w_j q_s^j (w = d in degree-corrected mode); the
// numerator runs over stored pairs in both orientations. Sets *converged
// when the loop met tol within max_iters.
std::vector<double> update_omega(const UncertainNetwork& net, const Marginals& marginals,
                                 double rho, const DegreeVector& degrees, BlockModelKind kind,
                                 std::vector<double> omega, double tol, int max_iters,
                                 bool* converged);

// Posterior edge tables t_rs^{ij} for every stored pair at the given params.
std::vector<double> edge_posterior_tables(const UncertainNetwork& net, const BlockParams& params,
                                          double rho, const DegreeVector& degrees,
                                          BlockModelKind kind);

// Full EM fit with restarts; returns the restart with the highest Bethe bound.
// Throws AllRestartsDegenerateError when every restart collapses a group
// below 1/n^2 prior mass.
FitResult em_fit(const UncertainNetwork& net, std::uint32_t k, BlockModelKind kind,
                 const EmOptions& opts);

// Single E-step at fixed parameters (no parameter updates); used for the
// known-parameters recovery curve and for scoring at loaded parameters.
FitResult e_step_at(const UncertainNetwork& net, const BlockParams& params, BlockModelKind kind,
                    const EmOptions& opts);

} // namespace uncnet
