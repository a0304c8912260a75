#pragma once

#include <cstdint>
#include <vector>

#include "uncnet/em.hpp"
#include "uncnet/generator.hpp"
#include "uncnet/recovery.hpp"

namespace uncnet {

// Planted two-group experiment: full uncertain-network fit vs the
// thresholding baseline over a tau grid, averaged over seeded instances.
struct CommunityBenchOptions {
    std::size_t n = 4000;
    double om_in = 0.02;
    double om_out = 0.014;
    double a1 = 1.4;  // noise solved from (a1, b1) unless use_c is set
    double b1 = 2.0;
    bool use_c = false;
    double c = 0.0;
    int instances = 5;
    std::uint64_t seed = 42;
    std::vector<double> tau_grid;  // empty: default grid
    std::uint32_t k = 2;
    EmOptions em;
    int threads = 0;  // outer-level parallelism over (instance, tau) tasks
};

struct CommunityBenchResult {
    std::vector<double> full_accuracy;                          // per instance
    std::vector<std::vector<ThresholdSweepPoint>> baseline;     // [instance][tau]
    std::vector<double> tau_grid;
    double full_mean = 0.0, full_stderr = 0.0;
    std::vector<double> baseline_mean, baseline_stderr;         // per tau
    double baseline_best_mean = 0.0;
    double baseline_best_tau = 0.0;
};

CommunityBenchResult run_community_benchmark(const CommunityBenchOptions& opts);

// Edge recovery experiment: EM posterior vs raw probabilities vs the
// known-parameters single E-step, scored by ROC AUC.
struct RecoveryBenchOptions {
    std::size_t n = 4000;
    double om_in = 0.05;
    double om_out = 0.001;
    double b1 = 4.0;
    double c = 0.15;  // solved noise coefficient (see benchmark docs)
    int instances = 5;
    std::uint64_t seed = 42;
    std::uint32_t k = 2;
    EmOptions em;
    RocUniverse universe = RocUniverse::scored_pairs;
    int threads = 0;
};

struct RecoveryBenchResult {
    std::vector<double> auc_em, auc_raw, auc_ideal;  // per instance
    double em_mean = 0.0, em_stderr = 0.0;
    double raw_mean = 0.0, raw_stderr = 0.0;
    double ideal_mean = 0.0, ideal_stderr = 0.0;
};

RecoveryBenchResult run_recovery_benchmark(const RecoveryBenchOptions& opts);

// Accuracy across a monotone noise sweep: c fixed, b1 per level, a1 solved.
struct NoiseSweepOptions {
    std::size_t n = 4000;
    double om_in = 0.02;
    double om_out = 0.008;
    double c = 0.02;
    std::vector<double> b1_levels = {0.5, 2.0, 4.0, 8.0};
    int seeds_per_level = 3;
    std::uint64_t seed = 42;
    std::uint32_t k = 2;
    EmOptions em;
    int threads = 0;
};

struct NoiseSweepResult {
    std::vector<double> b1_levels;
    std::vector<std::vector<double>> accuracy;  // [level][seed]
    std::vector<double> mean, stderr_;          // per level
};

NoiseSweepResult run_noise_sweep(const NoiseSweepOptions& opts);

double mean_of(const std::vector<double>& v);
double stderr_of(const std::vector<double>& v);

} // namespace uncnet
