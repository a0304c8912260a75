#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "uncnet/benchmarks.hpp"
#include "uncnet/em.hpp"
#include "uncnet/errors.hpp"
#include "uncnet/generator.hpp"
#include "uncnet/io.hpp"
#include "uncnet/network.hpp"
#include "uncnet/recovery.hpp"

using json = nlohmann::ordered_json;
using namespace uncnet;

namespace {

struct CommonFit {
    std::uint32_t k = 2;
    std::string mode = "plain";
    int restarts = 10;
    std::optional<std::uint64_t> seed;
    double tol_em = 1e-6, tol_bp = 1e-6, tol_inner = 1e-8;
    int max_iters = 200, bp_max_sweeps = 100;
    double damping = 0.0;
    int threads = 0;
};

void add_fit_flags(CLI::App* cmd, CommonFit& f) {
    cmd->add_option("--k", f.k, "number of groups")->check(CLI::PositiveNumber);
    cmd->add_option("--mode", f.mode, "block model variant: plain or dc")
        ->check(CLI::IsMember({"plain", "dc"}));
    cmd->add_option("--restarts", f.restarts, "independent EM restarts")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "RNG seed (default: drawn from entropy, echoed)");
    cmd->add_option("--tol-em", f.tol_em, "EM parameter-change tolerance")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--tol-bp", f.tol_bp, "message-change tolerance per BP run")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--tol-inner", f.tol_inner, "omega inner fixed-point tolerance")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-iters", f.max_iters, "EM iteration cap");
    cmd->add_option("--bp-max-sweeps", f.bp_max_sweeps, "BP sweep cap per E-step");
    cmd->add_option("--damping", f.damping, "message damping lambda in [0,1)");
    cmd->add_option("--threads", f.threads, "worker threads (0: UNCNET_THREADS or hardware)");
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
    if (seed) return *seed;
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

EmOptions to_em_options(const CommonFit& f, std::uint64_t seed) {
    EmOptions o;
    o.restarts = f.restarts;
    o.seed = seed;
    o.tol_em = f.tol_em;
    o.tol_bp = f.tol_bp;
    o.tol_inner = f.tol_inner;
    o.max_iters = f.max_iters;
    o.bp_max_sweeps = f.bp_max_sweeps;
    o.damping = f.damping;
    o.threads = f.threads;
    return o;
}

BlockModelKind kind_of(const std::string& mode) {
    return mode == "dc" ? BlockModelKind::degree_corrected : BlockModelKind::plain;
}

json fit_config_json(const CommonFit& f, std::uint64_t seed) {
    return json{{"k", f.k},
                {"mode", f.mode},
                {"restarts", f.restarts},
                {"seed", seed},
                {"tol_em", f.tol_em},
                {"tol_bp", f.tol_bp},
                {"tol_inner", f.tol_inner},
                {"max_iters", f.max_iters},
                {"bp_max_sweeps", f.bp_max_sweeps},
                {"damping", f.damping}};
}

json omega_matrix(const BlockParams& p) {
    json rows = json::array();
    for (std::uint32_t r = 0; r < p.k; ++r) {
        json row = json::array();
        for (std::uint32_t s = 0; s < p.k; ++s) row.push_back(p.om(r, s));
        rows.push_back(row);
    }
    return rows;
}

json result_document(const std::string& command, const json& config, const FitResult& fit,
                     bool with_timestamp, const json& metrics = json::object()) {
    json doc;
    doc["command"] = command;
    doc["config"] = config;
    if (with_timestamp) {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char buf[32];
        std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&now));
        doc["timestamp"] = buf;
    }
    json res;
    res["gamma"] = fit.params.gamma;
    res["omega"] = omega_matrix(fit.params);
    res["rho"] = fit.rho;
    res["bound"] = fit.bound;
    res["bound_trace"] = fit.bound_trace;
    res["converged"] = fit.converged;
    res["restarts_used"] = fit.restarts_used;
    res["warnings"] = fit.warnings;
    res["hard_partition"] = fit.hard_partition.g;
    json rows = json::array();
    const std::uint32_t k = fit.marginals.k;
    for (std::size_t i = 0; i < fit.hard_partition.g.size(); ++i) {
        json row = json::array();
        for (std::uint32_t r = 0; r < k; ++r) row.push_back(fit.marginals.node[i * k + r]);
        rows.push_back(row);
    }
    res["node_marginals"] = rows;
    if (!metrics.empty()) res["metrics"] = metrics;
    doc["result"] = res;
    return doc;
}

void emit(const json& doc, const std::string& out_path, bool to_stdout) {
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw Error("FileWriteFailed", "cannot create " + out_path);
        out << doc.dump(2) << "\n";
    }
    if (to_stdout) std::cout << doc.dump(2) << "\n";
}

BlockParams load_params_from(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("FileNotFound", "cannot open " + path);
    json doc = json::parse(in);
    const auto& res = doc.at("result");
    std::vector<double> gamma = res.at("gamma").get<std::vector<double>>();
    const auto& om = res.at("omega");
    const auto k = static_cast<std::uint32_t>(gamma.size());
    std::vector<double> omega;
    for (const auto& row : om)
        for (const auto& v : row) omega.push_back(v.get<double>());
    return BlockParams::validate(k, std::move(gamma), std::move(omega));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Community detection and edge recovery on uncertain networks"};
    app.require_subcommand(1);
    app.fallthrough();
    bool quiet = false;
    app.add_flag("--quiet", quiet, "suppress progress output");

    // ---- generate ----
    auto* gen = app.add_subcommand("generate", "sample a planted benchmark instance");
    struct {
        std::size_t n = 4000;
        double om_in = 0.02, om_out = 0.014;
        double a1 = 0.0, b1 = 2.0, c = 0.0;
        bool noiseless = false;
        std::optional<std::uint64_t> seed;
        std::string out = "instance";
    } g;
    gen->add_option("--n", g.n, "node count");
    gen->add_option("--omega-in", g.om_in, "within-group edge probability");
    gen->add_option("--omega-out", g.om_out, "between-group edge probability");
    auto* ga1 = gen->add_option("--a1", g.a1, "edge beta shape a1 (solves c)");
    gen->add_option("--b1", g.b1, "edge beta shape b1");
    auto* gc = gen->add_option("--c", g.c, "nonzero non-edge mass (solves a1)");
    gen->add_flag("--noiseless", g.noiseless, "exact limit: Q equals the adjacency");
    gen->add_option("--seed", g.seed, "RNG seed");
    gen->add_option("--out", g.out, "output path prefix");

    // ---- fit ----
    auto* fitc = app.add_subcommand("fit", "run the EM fit on an edge-probability file");
    CommonFit ff;
    add_fit_flags(fitc, ff);
    std::string fit_net, fit_out, fit_part_out, fit_labels;
    double fit_threshold = -1.0;
    bool fit_json = false, fit_no_ts = false;
    fitc->add_option("network", fit_net, "edge-probability file")->required();
    fitc->add_option("--out", fit_out, "result document path (JSON)");
    fitc->add_option("--partition-out", fit_part_out, "hard partition file path");
    fitc->add_option("--labels", fit_labels, "optional node label map (id<TAB>name)");
    fitc->add_option("--threshold-at", fit_threshold,
                     "binarize at this tau first (the thresholding baseline)")
        ->check(CLI::Range(0.0, 1.0));
    fitc->add_flag("--json", fit_json, "print the result document to stdout");
    fitc->add_flag("--no-timestamp", fit_no_ts, "omit the timestamp field");

    // ---- recover ----
    auto* rec = app.add_subcommand("recover", "posterior edge scores (fit or load parameters)");
    CommonFit rf;
    add_fit_flags(rec, rf);
    std::string rec_net, rec_scores = "scores.tsv", rec_out, rec_params_from;
    bool rec_json = false, rec_no_ts = false;
    rec->add_option("network", rec_net, "edge-probability file")->required();
    rec->add_option("--scores-out", rec_scores, "scored pair list path");
    rec->add_option("--params-from", rec_params_from,
                    "skip EM; single E-step at parameters from a result document");
    rec->add_option("--out", rec_out, "result document path (JSON)");
    rec->add_flag("--json", rec_json, "print the result document to stdout");
    rec->add_flag("--no-timestamp", rec_no_ts, "omit the timestamp field");

    // ---- roc ----
    auto* rocc = app.add_subcommand("roc", "ROC/AUC of a scored pair list against truth edges");
    std::string roc_scores, roc_truth, roc_curve_out;
    std::size_t roc_n = 0;
    bool roc_scored_only = false, roc_json = false;
    rocc->add_option("--scores", roc_scores, "scored pair list")->required();
    rocc->add_option("--truth", roc_truth, "truth edge file")->required();
    rocc->add_option("--n", roc_n, "node count (default: from file headers)");
    rocc->add_flag("--scored-only", roc_scored_only,
                   "rank only scored pairs (skip the implicit zero-score block)");
    rocc->add_option("--curve-out", roc_curve_out, "write curve points CSV");
    rocc->add_flag("--json", roc_json, "print JSON instead of plain text");

    // ---- accuracy ----
    auto* accc = app.add_subcommand("accuracy", "aligned accuracy of a partition against truth");
    std::string acc_pred, acc_truth;
    bool acc_hungarian = false, acc_json = false;
    accc->add_option("--pred", acc_pred, "predicted partition file")->required();
    accc->add_option("--truth", acc_truth, "truth partition file")->required();
    accc->add_flag("--hungarian", acc_hungarian, "assignment-based alignment (any k)");
    accc->add_flag("--json", acc_json, "print JSON instead of plain text");

    // ---- benchmark-fig2a ----
    auto* b2a = app.add_subcommand(
        "benchmark-fig2a", "community benchmark: EM vs thresholding over a tau grid");
    CommunityBenchOptions b2;
    std::string b2_csv = "fig2a.csv";
    b2a->add_option("--n", b2.n, "node count");
    b2a->add_option("--omega-in", b2.om_in, "within-group probability");
    b2a->add_option("--omega-out", b2.om_out, "between-group probability");
    b2a->add_option("--a1", b2.a1, "edge beta shape a1");
    b2a->add_option("--b1", b2.b1, "edge beta shape b1");
    b2a->add_option("--instances", b2.instances, "replications");
    b2a->add_option("--seed", b2.seed, "root seed");
    b2a->add_option("--restarts", b2.em.restarts, "EM restarts per fit");
    b2a->add_option("--max-iters", b2.em.max_iters, "EM iteration cap");
    b2a->add_option("--bp-max-sweeps", b2.em.bp_max_sweeps, "BP sweep cap");
    b2a->add_option("--tol-em", b2.em.tol_em, "EM tolerance");
    b2a->add_option("--threads", b2.threads, "worker threads");
    b2a->add_option("--out", b2_csv, "output CSV path");

    // ---- benchmark-fig4 ----
    auto* b4c = app.add_subcommand(
        "benchmark-fig4", "edge recovery benchmark: EM vs raw-Q vs known-parameters AUC");
    RecoveryBenchOptions b4;
    std::string b4_csv = "fig4.csv";
    bool b4_all_pairs = false;
    b4c->add_option("--n", b4.n, "node count");
    b4c->add_option("--omega-in", b4.om_in, "within-group probability");
    b4c->add_option("--omega-out", b4.om_out, "between-group probability");
    b4c->add_option("--b1", b4.b1, "edge beta shape b1");
    b4c->add_option("--c", b4.c, "nonzero non-edge mass");
    b4c->add_option("--instances", b4.instances, "replications");
    b4c->add_option("--seed", b4.seed, "root seed");
    b4c->add_option("--restarts", b4.em.restarts, "EM restarts per fit");
    b4c->add_option("--max-iters", b4.em.max_iters, "EM iteration cap");
    b4c->add_option("--bp-max-sweeps", b4.em.bp_max_sweeps, "BP sweep cap");
    b4c->add_option("--threads", b4.threads, "worker threads");
    b4c->add_flag("--all-pairs", b4_all_pairs,
                  "rank every node pair (zero scores included) instead of scored pairs");
    b4c->add_option("--out", b4_csv, "output CSV path");

    // ---- benchmark-noise-sweep ----
    auto* bns = app.add_subcommand(
        "benchmark-noise-sweep", "accuracy across increasing noise levels (b1 sweep, c fixed)");
    NoiseSweepOptions ns;
    std::string ns_csv = "noise_sweep.csv";
    bns->add_option("--n", ns.n, "node count");
    bns->add_option("--omega-in", ns.om_in, "within-group probability");
    bns->add_option("--omega-out", ns.om_out, "between-group probability");
    bns->add_option("--c", ns.c, "nonzero non-edge mass (fixed across levels)");
    bns->add_option("--b1-levels", ns.b1_levels, "noise levels (b1 values)");
    bns->add_option("--seeds-per-level", ns.seeds_per_level, "replications per level");
    bns->add_option("--seed", ns.seed, "root seed");
    bns->add_option("--restarts", ns.em.restarts, "EM restarts per fit");
    bns->add_option("--max-iters", ns.em.max_iters, "EM iteration cap");
    bns->add_option("--bp-max-sweeps", ns.em.bp_max_sweeps, "BP sweep cap");
    bns->add_option("--threads", ns.threads, "worker threads");
    bns->add_option("--out", ns_csv, "output CSV path");

    for (auto* sc : app.get_subcommands([](CLI::App*) { return true; })) sc->fallthrough();
    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            const std::uint64_t seed = resolve_seed(g.seed);
            const auto params = BlockParams::two_group(g.om_in, g.om_out);
            NoiseRequest req;
            req.noiseless = g.noiseless;
            req.b1 = g.b1;
            if (*ga1) req.a1 = g.a1;
            if (*gc) req.c = g.c;
            if (!g.noiseless && !req.a1 && !req.c)
                throw Error("InvalidNoiseRequest", "give --a1 or --c (or --noiseless)");
            const PlantedInstance inst = generate_benchmark(g.n, params, req, seed);
            write_edgeprob_file(g.out + ".net.tsv", inst.network);
            write_partition_file(g.out + ".truth.tsv", inst.truth);
            write_edge_file(g.out + ".edges.tsv", inst.truth_edges, g.n);
            if (!quiet) {
                json info{{"seed", seed},
                          {"n", g.n},
                          {"edges", inst.truth_edges.size()},
                          {"stored_pairs", inst.network.pair_count()},
                          {"noise",
                           inst.noise.noiseless
                               ? json{{"noiseless", true}}
                               : json{{"a1", inst.noise.a1},
                                      {"b1", inst.noise.b1},
                                      {"a0", inst.noise.a0},
                                      {"b0", inst.noise.b0},
                                      {"c", inst.noise.c},
                                      {"rho", inst.noise.rho}}},
                          {"files",
                           {g.out + ".net.tsv", g.out + ".truth.tsv", g.out + ".edges.tsv"}}};
                std::cout << info.dump(2) << "\n";
            }
        } else if (*fitc) {
            const std::uint64_t seed = resolve_seed(ff.seed);
            auto net = read_edgeprob_file(fit_net);
            if (fit_threshold >= 0.0) net = threshold_network(net, fit_threshold);
            const FitResult fit = em_fit(net, ff.k, kind_of(ff.mode), to_em_options(ff, seed));
            json config = fit_config_json(ff, seed);
            config["network"] = fit_net;
            if (fit_threshold >= 0.0) config["threshold_at"] = fit_threshold;
            json metrics = json::object();
            if (!fit_labels.empty()) {
                const auto labels = read_label_map(fit_labels, net.node_count());
                json named = json::array();
                for (std::size_t i = 0; i < labels.size(); ++i)
                    if (!labels[i].empty())
                        named.push_back(json{{"id", i},
                                             {"name", labels[i]},
                                             {"group", fit.hard_partition.g[i]}});
                metrics["labeled_nodes"] = named;
            }
            const json doc = result_document("fit", config, fit, !fit_no_ts, metrics);
            if (!fit_part_out.empty()) write_partition_file(fit_part_out, fit.hard_partition);
            emit(doc, fit_out, fit_json);
            if (!fit_json && !quiet)
                std::cout << "fit: converged=" << fit.converged << " bound=" << fit.bound
                          << " warnings=" << fit.warnings.size() << "\n";
        } else if (*rec) {
            const std::uint64_t seed = resolve_seed(rf.seed);
            const auto net = read_edgeprob_file(rec_net);
            FitResult fit;
            if (!rec_params_from.empty()) {
                const BlockParams params = load_params_from(rec_params_from);
                fit = e_step_at(net, params, kind_of(rf.mode), to_em_options(rf, seed));
            } else {
                fit = em_fit(net, rf.k, kind_of(rf.mode), to_em_options(rf, seed));
            }
            const EdgeScoreList scores = edge_posterior(fit, net);
            write_scores_file(rec_scores, scores, net.node_count());
            json config = fit_config_json(rf, seed);
            config["network"] = rec_net;
            if (!rec_params_from.empty()) config["params_from"] = rec_params_from;
            const json doc = result_document("recover", config, fit, !rec_no_ts,
                                             json{{"scores_file", rec_scores}});
            if (!rec_out.empty() || rec_json) emit(doc, rec_out, rec_json);
            if (!rec_json && !quiet)
                std::cout << "recover: wrote " << scores.scores.size() << " scores to "
                          << rec_scores << "\n";
        } else if (*rocc) {
            std::size_t n_scores = 0, n_truth = 0;
            const EdgeScoreList scores = read_scores_file(roc_scores, &n_scores);
            const auto truth = read_edge_file(roc_truth, &n_truth);
            std::size_t n = roc_n ? roc_n : std::max(n_scores, n_truth);
            if (n == 0) throw Error("MissingNodeCount", "give --n or files with headers");
            const ROCCurve curve =
                roc(scores, truth, n,
                    roc_scored_only ? RocUniverse::scored_pairs : RocUniverse::all_pairs);
            if (!roc_curve_out.empty()) write_roc_csv(roc_curve_out, curve);
            if (roc_json)
                std::cout << json{{"auc", curve.auc}, {"points", curve.points.size()}}.dump(2)
                          << "\n";
            else
                std::cout << "auc=" << curve.auc << "\n";
        } else if (*accc) {
            const Partition pred = read_partition_file(acc_pred);
            const Partition truth = read_partition_file(acc_truth);
            const double acc = acc_hungarian ? aligned_accuracy_hungarian(pred, truth)
                                             : aligned_accuracy(pred, truth);
            if (acc_json)
                std::cout << json{{"accuracy", acc}}.dump(2) << "\n";
            else
                std::cout << "accuracy=" << acc << "\n";
        } else if (*b2a) {
            b2.em.threads = 1;
            const CommunityBenchResult res = run_community_benchmark(b2);
            std::ofstream csv(b2_csv);
            csv << "# full_method_mean=" << res.full_mean
                << " full_method_stderr=" << res.full_stderr << "\n";
            csv << "tau,baseline_mean,baseline_stderr\n";
            for (std::size_t t = 0; t < res.tau_grid.size(); ++t)
                csv << res.tau_grid[t] << ',' << res.baseline_mean[t] << ','
                    << res.baseline_stderr[t] << "\n";
            if (!quiet) {
                std::cout << "full method: " << res.full_mean << " +- " << res.full_stderr
                          << "\n";
                std::cout << "baseline best: " << res.baseline_best_mean
                          << " at tau=" << res.baseline_best_tau << "\n";
                std::cout << "wrote " << b2_csv << "\n";
            }
        } else if (*b4c) {
            if (b4_all_pairs) b4.universe = RocUniverse::all_pairs;
            const RecoveryBenchResult res = run_recovery_benchmark(b4);
            std::ofstream csv(b4_csv);
            csv << "method,auc_mean,auc_stderr\n";
            csv << "em-posterior," << res.em_mean << ',' << res.em_stderr << "\n";
            csv << "raw-q," << res.raw_mean << ',' << res.raw_stderr << "\n";
            csv << "known-parameters," << res.ideal_mean << ',' << res.ideal_stderr << "\n";
            if (!quiet) {
                std::cout << "em-posterior AUC: " << res.em_mean << " +- " << res.em_stderr
                          << "\n";
                std::cout << "raw-q AUC: " << res.raw_mean << " +- " << res.raw_stderr << "\n";
                std::cout << "known-parameters AUC: " << res.ideal_mean << " +- "
                          << res.ideal_stderr << "\n";
                std::cout << "wrote " << b4_csv << "\n";
            }
        } else if (*bns) {
            ns.em.threads = 1;
            const NoiseSweepResult res = run_noise_sweep(ns);
            std::ofstream csv(ns_csv);
            csv << "b1,accuracy_mean,accuracy_stderr\n";
            for (std::size_t l = 0; l < res.b1_levels.size(); ++l)
                csv << res.b1_levels[l] << ',' << res.mean[l] << ',' << res.stderr_[l] << "\n";
            if (!quiet) {
                for (std::size_t l = 0; l < res.b1_levels.size(); ++l)
                    std::cout << "b1=" << res.b1_levels[l] << ": " << res.mean[l] << " +- "
                              << res.stderr_[l] << "\n";
                std::cout << "wrote " << ns_csv << "\n";
            }
        }
    } catch (const Error& e) {
        std::cerr << "error[" << e.category() << "]: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error[Internal]: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
