#include "uncnet/network.hpp"

#include <algorithm>

#include "uncnet/errors.hpp"

namespace uncnet {

UncertainNetwork UncertainNetwork::validate(std::size_t n, std::vector<PairProb> raw_pairs) {
    for (auto& p : raw_pairs) {
        if (p.i == p.j) throw SelfEdgeError(p.i);
        if (p.i >= n) throw NodeIdOutOfRangeError(p.i, n);
        if (p.j >= n) throw NodeIdOutOfRangeError(p.j, n);
        if (!(p.q > 0.0) || p.q > 1.0) throw ProbabilityOutOfRangeError(p.i, p.j, p.q);
        if (p.i > p.j) std::swap(p.i, p.j);
    }
    std::sort(raw_pairs.begin(), raw_pairs.end(), [](const PairProb& a, const PairProb& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    for (std::size_t p = 1; p < raw_pairs.size(); ++p) {
        if (raw_pairs[p].i == raw_pairs[p - 1].i && raw_pairs[p].j == raw_pairs[p - 1].j)
            throw DuplicatePairError(raw_pairs[p].i, raw_pairs[p].j);
    }

    UncertainNetwork net;
    net.n_ = n;
    net.pairs_ = std::move(raw_pairs);

    net.adj_offsets_.assign(n + 1, 0);
    for (const auto& p : net.pairs_) {
        ++net.adj_offsets_[p.i + 1];
        ++net.adj_offsets_[p.j + 1];
        net.q_sum_ += p.q;
        if (p.q != 1.0) net.binary_ = false;
    }
    for (std::size_t v = 0; v < n; ++v) net.adj_offsets_[v + 1] += net.adj_offsets_[v];

    net.adj_.resize(2 * net.pairs_.size());
    std::vector<std::size_t> cursor(net.adj_offsets_.begin(), net.adj_offsets_.end() - 1);
    for (std::uint32_t p = 0; p < net.pairs_.size(); ++p) {
        const auto& pr = net.pairs_[p];
        net.adj_[cursor[pr.i]++] = Neighbor{pr.j, p, pr.q};
        net.adj_[cursor[pr.j]++] = Neighbor{pr.i, p, pr.q};
    }
    return net;
}

double estimate_density(const UncertainNetwork& net) {
    const std::size_t n = net.node_count();
    if (n < 2) throw TooFewNodesError(n);
    return net.q_sum() / static_cast<double>(net.total_pair_count());
}

DegreeVector expected_degrees(const UncertainNetwork& net) {
    DegreeVector deg;
    deg.d.assign(net.node_count(), 0.0);
    for (const auto& p : net.pairs()) {
        deg.d[p.i] += p.q;
        deg.d[p.j] += p.q;
    }
    deg.mode = net.is_binary() ? DegreeMode::exact_binary : DegreeMode::expected;
    return deg;
}

} // namespace uncnet
