#pragma once

#include <cstdint>
#include <vector>

#include "uncnet/generator.hpp"
#include "uncnet/network.hpp"

namespace uncnet {

enum class BlockModelKind { plain, degree_corrected };

// One simplex message per directed half-edge of the nonzero-Q graph.
// Directed index: 2*p for i->j and 2*p+1 for j->i, where pair p is (i,j), i<j.
struct MessageSet {
    std::uint32_t k = 0;
    std::vector<double> eta;  // (2 * pair_count) * k

    double* at(std::size_t directed) { return eta.data() + directed * k; }
    const double* at(std::size_t directed) const { return eta.data() + directed * k; }
    std::size_t count() const { return k == 0 ? 0 : eta.size() / k; }
};

struct Marginals {
    std::uint32_t k = 0;
    std::vector<double> node;  // n * k
    std::vector<double> pair;  // pair_count * k * k; [p*k*k + r*k + s] = P(g_i=r, g_j=s)

    const double* node_row(std::size_t i) const { return node.data() + i * k; }
    const double* pair_table(std::size_t p) const { return pair.data() + p * k * k; }
};

struct BpOptions {
    double tol = 1e-6;
    int max_sweeps = 100;
    double damping = 0.0;  // eta_new = (1-damping)*candidate + damping*old
};

struct BpRunResult {
    bool converged = false;
    int sweeps = 0;
    double final_delta = 0.0;
};

// Asynchronous belief propagation for the uncertain-network block model.
// Messages update in a fixed order (per node, in adjacency order); the
// external field is recomputed at sweep start and adjusted incrementally as
// node marginals change.
class BpEngine {
public:
    BpEngine(const UncertainNetwork& net, BlockParams params, BlockModelKind kind,
             DegreeVector degrees, double rho);

    // Plain-model convenience: degrees all ones.
    BpEngine(const UncertainNetwork& net, BlockParams params, double rho);

    void set_params(BlockParams params);
    const BlockParams& params() const { return params_; }

    void set_messages(const MessageSet& init);
    const MessageSet& messages() const { return messages_; }
    MessageSet& messages() { return messages_; }

    // One full sweep; returns the max absolute message change. Each message
    // updates in place as (1-damping)*candidate + damping*old.
    // Throws NumericalUnderflowError when a message normalizer vanishes.
    double sweep(double damping = 0.0);

    // Sweeps until the delta drops below tol or max_sweeps is reached, then
    // refreshes node marginals from the final messages.
    BpRunResult run(const BpOptions& opts);

    // Node marginals from the current messages (kept in sync by sweeps).
    const std::vector<double>& node_marginals() const { return node_marg_; }

    // Node + pair marginals from the current messages.
    Marginals marginals() const;

    // Bethe estimate of the log evidence log P(Q | gamma, omega), assembled
    // from node/pair normalizers with the mean-field non-edge correction.
    double bethe_log_evidence() const;

    double rho() const { return rho_; }
    BlockModelKind kind() const { return kind_; }
    const DegreeVector& degrees() const { return degrees_; }
    const UncertainNetwork& network() const { return net_; }

private:
    struct HalfEdge {
        std::uint32_t in;    // directed index of the neighbor's message toward this node
        std::uint32_t out;   // directed index of this node's message toward the neighbor
        double alpha;        // q / rho
        double beta;         // (1-q) / (1-rho)
        double dd;           // d_i * d_neighbor (1 in plain mode)
    };

    void build_tables();
    void refresh_field();
    void refresh_node_marginal(std::uint32_t i);
    // Computes per-neighbor factors B and their product for node i; returns
    // the shared exponent. Fills scratch buffers.
    void node_factors(std::uint32_t i);

    const UncertainNetwork& net_;
    BlockParams params_;
    BlockModelKind kind_;
    DegreeVector degrees_;
    double rho_;

    MessageSet messages_;
    std::vector<double> node_marg_;       // n*k, running marginals
    std::vector<double> weighted_sum_;    // k: M_s = sum_i w_i q_s^i (w = d in DC mode)
    std::vector<HalfEdge> half_edges_;    // CSR order aligned with net adjacency
    std::vector<std::size_t> he_offsets_;

    // scratch (single-writer per engine)
    std::vector<double> B_;          // deg * k neighbor factors
    std::vector<double> prod_m_;     // k mantissas of the full product over nonzero B
    std::vector<int> prod_e_;        // k exponents (decimal)
    std::vector<int> zero_cnt_;      // k zero counts
    std::vector<double> base_;       // k: gamma_r * exp(-(h_r - h_min))
    std::vector<double> scratch_;    // k
    double last_hmin_ = 0.0;         // field shift used by the last node_factors call
};

// Spec-style wrappers used by tests and simple callers.

// One sweep over a fresh engine state built from `messages`.
double bp_sweep(const UncertainNetwork& net, const BlockParams& params,
                const DegreeVector& degrees, BlockModelKind kind, MessageSet& messages,
                double rho, double damping = 0.0);

struct BpRunOutput {
    MessageSet messages;
    Marginals marginals;
    bool converged = false;
    int sweeps = 0;
};

BpRunOutput bp_run(const UncertainNetwork& net, const BlockParams& params,
                   const DegreeVector& degrees, BlockModelKind kind, const MessageSet& init,
                   double tol, int max_sweeps, double rho, double damping = 0.0);

// Pair tables q_rs^{ij} from converged (or final) messages.
std::vector<double> pair_marginals(const UncertainNetwork& net, const BlockParams& params,
                                   const DegreeVector& degrees, BlockModelKind kind,
                                   const MessageSet& messages, double rho);

// Uniform-plus-nothing message set: every message equals gamma.
MessageSet messages_from_prior(const UncertainNetwork& net, const BlockParams& params);

} // namespace uncnet
