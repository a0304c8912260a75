#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace uncnet {

// One stored node pair with its observed connection probability, i < j.
struct PairProb {
    std::uint32_t i = 0;
    std::uint32_t j = 0;
    double q = 0.0;

    friend bool operator==(const PairProb&, const PairProb&) = default;
};

// A network observed as per-pair connection probabilities. Only pairs with
// q > 0 are stored; absent pairs have q = 0 by convention. Immutable after
// construction, safe for concurrent reads.
class UncertainNetwork {
public:
    struct Neighbor {
        std::uint32_t node;  // the other endpoint
        std::uint32_t pair;  // index into pairs()
        double q;
    };

    // Validates raw pairs (any order) and builds the canonical network:
    // pairs normalized to i < j and sorted lexicographically.
    // Throws SelfEdgeError, DuplicatePairError, ProbabilityOutOfRangeError,
    // NodeIdOutOfRangeError.
    static UncertainNetwork validate(std::size_t n, std::vector<PairProb> raw_pairs);

    std::size_t node_count() const { return n_; }
    std::size_t pair_count() const { return pairs_.size(); }
    std::size_t total_pair_count() const { return n_ * (n_ - 1) / 2; }

    std::span<const PairProb> pairs() const { return pairs_; }
    const PairProb& pair(std::size_t p) const { return pairs_[p]; }

    std::span<const Neighbor> neighbors(std::uint32_t node) const {
        return {adj_.data() + adj_offsets_[node], adj_.data() + adj_offsets_[node + 1]};
    }
    std::size_t degree(std::uint32_t node) const {
        return adj_offsets_[node + 1] - adj_offsets_[node];
    }

    // Sum of all stored probabilities (the expected edge count).
    double q_sum() const { return q_sum_; }

    // True when every stored probability equals 1 (a definite binary network).
    bool is_binary() const { return binary_; }

private:
    UncertainNetwork() = default;

    std::size_t n_ = 0;
    std::vector<PairProb> pairs_;
    std::vector<Neighbor> adj_;
    std::vector<std::size_t> adj_offsets_;
    double q_sum_ = 0.0;
    bool binary_ = true;
};

enum class DegreeMode { exact_binary, expected };

struct DegreeVector {
    std::vector<double> d;
    DegreeMode mode = DegreeMode::expected;
};

// Hard assignment of nodes to groups 0..k-1.
struct Partition {
    std::vector<std::uint32_t> g;
    std::uint32_t k = 0;
};

// Expected-edge density estimate: sum_{i<j} Q_ij / C(n,2).
// Throws TooFewNodesError for n < 2.
double estimate_density(const UncertainNetwork& net);

// Per-node expected degrees d_i = sum_j Q_ij. Mode is exact_binary when the
// network is binary.
DegreeVector expected_degrees(const UncertainNetwork& net);

} // namespace uncnet
