#include "uncnet/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "uncnet/errors.hpp"

namespace uncnet {

EdgeScoreList edge_posterior(const FitResult& fit, const UncertainNetwork& net) {
    const std::uint32_t k = fit.marginals.k;
    if (fit.t.size() != net.pair_count() * k * k ||
        fit.marginals.pair.size() != net.pair_count() * k * k)
        throw MismatchedFitError("fit tables do not match the network's stored pairs");
    EdgeScoreList out;
    out.method = "em-posterior";
    out.scores.reserve(net.pair_count());
    for (std::size_t p = 0; p < net.pair_count(); ++p) {
        const double* t = fit.t.data() + p * k * k;
        const double* q = fit.marginals.pair.data() + p * k * k;
        double s = 0.0;
        for (std::uint32_t idx = 0; idx < k * k; ++idx) s += t[idx] * q[idx];
        out.scores.push_back({net.pair(p).i, net.pair(p).j, std::clamp(s, 0.0, 1.0)});
    }
    return out;
}

EdgeScoreList raw_q_scores(const UncertainNetwork& net) {
    EdgeScoreList out;
    out.method = "raw-q";
    out.scores.reserve(net.pair_count());
    for (const auto& p : net.pairs()) out.scores.push_back({p.i, p.j, p.q});
    return out;
}

ROCCurve roc(const EdgeScoreList& scores,
             const std::vector<std::pair<std::uint32_t, std::uint32_t>>& truth_edges,
             std::size_t n, RocUniverse universe) {
    std::unordered_set<std::uint64_t> truth;
    truth.reserve(truth_edges.size() * 2);
    for (auto [i, j] : truth_edges) {
        if (i > j) std::swap(i, j);
        truth.insert(static_cast<std::uint64_t>(i) * n + j);
    }

    struct Entry {
        double score;
        bool positive;
    };
    std::vector<Entry> entries;
    entries.reserve(scores.scores.size());
    std::size_t scored_pos = 0;
    for (const auto& s : scores.scores) {
        const bool pos = truth.contains(static_cast<std::uint64_t>(s.i) * n + s.j);
        entries.push_back({s.score, pos});
        if (pos) ++scored_pos;
    }

    const std::size_t universe_size = universe == RocUniverse::all_pairs
                                          ? n * (n - 1) / 2
                                          : scores.scores.size();
    const std::size_t total_pos =
        universe == RocUniverse::all_pairs ? truth.size() : scored_pos;
    if (total_pos == 0) throw EmptyTruthError();
    if (total_pos >= universe_size) throw FullTruthError();
    const std::size_t total_neg = universe_size - total_pos;

    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.score > b.score; });

    ROCCurve curve;
    curve.points.emplace_back(0.0, 0.0);
    std::size_t tp = 0, fp = 0;
    double auc = 0.0;
    double prev_fpr = 0.0, prev_tpr = 0.0;
    auto emit = [&](std::size_t tpos, std::size_t fpos) {
        tp += tpos;
        fp += fpos;
        const double tpr = static_cast<double>(tp) / total_pos;
        const double fpr = static_cast<double>(fp) / total_neg;
        auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        curve.points.emplace_back(fpr, tpr);
        prev_fpr = fpr;
        prev_tpr = tpr;
    };

    std::size_t g_pos = 0, g_neg = 0;
    for (std::size_t e = 0; e < entries.size(); ++e) {
        if (entries[e].positive)
            ++g_pos;
        else
            ++g_neg;
        const bool group_end = e + 1 == entries.size() || entries[e + 1].score != entries[e].score;
        if (!group_end) continue;
        if (entries[e].score == 0.0) break;  // merged into the implicit zero block
        emit(g_pos, g_neg);
        g_pos = g_neg = 0;
    }

    // implicit zero-score block: everything not yet swept (stored zero scores
    // plus the never-materialized pairs)
    const std::size_t zp = total_pos - tp;
    const std::size_t zn = total_neg - fp;
    if (zp > 0 || zn > 0) emit(zp, zn);

    curve.auc = auc;
    return curve;
}

UncertainNetwork threshold_network(const UncertainNetwork& net, double tau) {
    if (!(tau >= 0.0) || tau >= 1.0)
        throw Error("InvalidThreshold", "tau must lie in [0,1)");
    std::vector<PairProb> pairs;
    for (const auto& p : net.pairs())
        if (p.q > tau) pairs.push_back({p.i, p.j, 1.0});
    return UncertainNetwork::validate(net.node_count(), std::move(pairs));
}

namespace {

std::vector<std::vector<std::size_t>> confusion(const Partition& pred, const Partition& truth,
                                                std::uint32_t kk) {
    std::vector<std::vector<std::size_t>> c(kk, std::vector<std::size_t>(kk, 0));
    for (std::size_t i = 0; i < pred.g.size(); ++i) ++c[pred.g[i]][truth.g[i]];
    return c;
}

} // namespace

double aligned_accuracy(const Partition& pred, const Partition& truth) {
    if (pred.g.size() != truth.g.size())
        throw SizeMismatchError("partitions cover different node counts");
    const std::uint32_t kk = std::max(pred.k, truth.k);
    if (kk > 8)
        throw TooManyGroupsError("exhaustive alignment is capped at k=8; use "
                                 "aligned_accuracy_hungarian");
    const auto c = confusion(pred, truth, kk);
    std::vector<std::uint32_t> perm(kk);
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t best = 0;
    do {
        std::size_t hits = 0;
        for (std::uint32_t r = 0; r < kk; ++r) hits += c[r][perm[r]];
        best = std::max(best, hits);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / static_cast<double>(pred.g.size());
}

double aligned_accuracy_hungarian(const Partition& pred, const Partition& truth) {
    if (pred.g.size() != truth.g.size())
        throw SizeMismatchError("partitions cover different node counts");
    const std::uint32_t kk = std::max(pred.k, truth.k);
    const auto c = confusion(pred, truth, kk);

    // Jonker-Volgenant style shortest augmenting path assignment, maximizing
    // total confusion weight (solved as min-cost on negated weights).
    const std::size_t m = kk;
    const double INF = 1e18;
    std::vector<double> u(m + 1, 0), v(m + 1, 0);
    std::vector<std::size_t> match(m + 1, 0);  // matched row for each column (1-based)
    for (std::size_t r = 1; r <= m; ++r) {
        match[0] = r;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, INF);
        std::vector<bool> used(m + 1, false);
        std::vector<std::size_t> way(m + 1, 0);
        do {
            used[j0] = true;
            const std::size_t r0 = match[j0];
            double delta = INF;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cost = -static_cast<double>(c[r0 - 1][j - 1]) - u[r0] - v[j];
                if (cost < minv[j]) {
                    minv[j] = cost;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }
    std::size_t hits = 0;
    for (std::size_t j = 1; j <= m; ++j)
        if (match[j] != 0) hits += c[match[j] - 1][j - 1];
    return static_cast<double>(hits) / static_cast<double>(pred.g.size());
}

std::vector<ThresholdSweepPoint> threshold_sweep(const UncertainNetwork& net,
                                                 const Partition& truth,
                                                 const std::vector<double>& tau_grid,
                                                 std::uint32_t k, const EmOptions& opts) {
    std::vector<ThresholdSweepPoint> out;
    out.reserve(tau_grid.size());
    for (const double tau : tau_grid) {
        ThresholdSweepPoint pt;
        pt.tau = tau;
        UncertainNetwork binary = threshold_network(net, tau);
        pt.kept_pairs = binary.pair_count();
        double acc;
        try {
            const FitResult fit = em_fit(binary, k, BlockModelKind::plain, opts);
            acc = aligned_accuracy(fit.hard_partition, truth);
        } catch (const Error&) {
            // no usable data at this threshold: constant partition
            Partition constant{std::vector<std::uint32_t>(truth.g.size(), 0), truth.k};
            acc = aligned_accuracy(constant, truth);
        }
        pt.accuracy = acc;
        out.push_back(pt);
    }
    return out;
}

std::vector<double> default_tau_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 19; ++i) grid.push_back(0.05 * i);
    return grid;
}

} // namespace uncnet
