#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "uncnet/em.hpp"
#include "uncnet/network.hpp"

namespace uncnet {

struct EdgeScore {
    std::uint32_t i = 0, j = 0;  // i < j
    double score = 0.0;
};

struct EdgeScoreList {
    std::vector<EdgeScore> scores;  // unique pairs; unstored pairs score 0 implicitly
    std::string method;
};

struct ROCCurve {
    std::vector<std::pair<double, double>> points;  // (fpr, tpr), (0,0) .. (1,1)
    double auc = 0.0;
};

// Which negatives an ROC sweep ranks over: every node pair (pairs without a
// score enter as score 0), or only the scored pairs (the universe the
// uncertain data actually reports).
enum class RocUniverse { all_pairs, scored_pairs };

// Posterior edge probability per stored pair: score = sum_rs t_rs q_rs.
EdgeScoreList edge_posterior(const FitResult& fit, const UncertainNetwork& net);

// Raw observed probabilities as scores.
EdgeScoreList raw_q_scores(const UncertainNetwork& net);

// Threshold sweep over descending unique scores with tied scores grouped;
// zero-score pairs are accounted combinatorially, never materialized.
// Throws EmptyTruthError / FullTruthError when the curve is undefined.
ROCCurve roc(const EdgeScoreList& scores,
             const std::vector<std::pair<std::uint32_t, std::uint32_t>>& truth_edges,
             std::size_t n, RocUniverse universe = RocUniverse::all_pairs);

// Binary network: pairs with q > tau become certain edges, others drop.
UncertainNetwork threshold_network(const UncertainNetwork& net, double tau);

// Fraction of nodes classified correctly under the best label permutation
// (exhaustive; throws TooManyGroupsError above k = 8).
double aligned_accuracy(const Partition& pred, const Partition& truth);

// Same metric via an O(k^3) assignment solve; any k.
double aligned_accuracy_hungarian(const Partition& pred, const Partition& truth);

struct ThresholdSweepPoint {
    double tau = 0.0;
    double accuracy = 0.0;
    std::size_t kept_pairs = 0;
};

// Thresholding baseline: for every tau, binarize and fit a standard block
// model, then score against the planted truth. An empty or degenerate
// thresholded network scores as the constant-partition baseline.
std::vector<ThresholdSweepPoint> threshold_sweep(const UncertainNetwork& net,
                                                 const Partition& truth,
                                                 const std::vector<double>& tau_grid,
                                                 std::uint32_t k, const EmOptions& opts);

std::vector<double> default_tau_grid();  // 0.05, 0.10, ..., 0.95

} // namespace uncnet
