#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "uncnet/benchmarks.hpp"
#include "uncnet/em.hpp"
#include "uncnet/errors.hpp"
#include "uncnet/generator.hpp"
#include "uncnet/io.hpp"
#include "uncnet/network.hpp"
#include "uncnet/oracle.hpp"
#include "uncnet/recovery.hpp"

namespace py = pybind11;
using namespace uncnet;

namespace {

UncertainNetwork make_network(std::size_t n,
                              const std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>& pairs) {
    std::vector<PairProb> pp;
    pp.reserve(pairs.size());
    for (const auto& [i, j, q] : pairs) pp.push_back({i, j, q});
    return UncertainNetwork::validate(n, std::move(pp));
}

std::vector<std::vector<double>> node_marginal_rows(const Marginals& m, std::size_t n) {
    std::vector<std::vector<double>> rows(n, std::vector<double>(m.k));
    for (std::size_t i = 0; i < n; ++i)
        for (std::uint32_t r = 0; r < m.k; ++r) rows[i][r] = m.node[i * m.k + r];
    return rows;
}

BlockModelKind kind_from_string(const std::string& mode) {
    if (mode == "plain") return BlockModelKind::plain;
    if (mode == "dc" || mode == "degree-corrected") return BlockModelKind::degree_corrected;
    throw Error("InvalidMode", "mode must be 'plain' or 'dc'");
}

} // namespace

PYBIND11_MODULE(_uncnet, m) {
    m.doc() = "Community detection and edge recovery on uncertain networks";

    py::register_exception<Error>(m, "UncnetError");

    py::class_<UncertainNetwork>(m, "UncertainNetwork")
        .def_static("from_pairs", &make_network, py::arg("n"), py::arg("pairs"))
        .def_property_readonly("n", &UncertainNetwork::node_count)
        .def_property_readonly("pair_count", &UncertainNetwork::pair_count)
        .def("pairs",
             [](const UncertainNetwork& net) {
                 std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> out;
                 out.reserve(net.pair_count());
                 for (const auto& p : net.pairs()) out.emplace_back(p.i, p.j, p.q);
                 return out;
             })
        .def("density", &estimate_density)
        .def("expected_degrees",
             [](const UncertainNetwork& net) { return expected_degrees(net).d; })
        .def("threshold", &threshold_network, py::arg("tau"));

    py::class_<BlockParams>(m, "BlockParams")
        .def_static("create",
                    [](std::uint32_t k, std::vector<double> gamma, std::vector<double> omega) {
                        return BlockParams::validate(k, std::move(gamma), std::move(omega));
                    })
        .def_static("two_group", &BlockParams::two_group, py::arg("om_in"), py::arg("om_out"))
        .def_readonly("k", &BlockParams::k)
        .def_readonly("gamma", &BlockParams::gamma)
        .def_readonly("omega", &BlockParams::omega);

    py::class_<NoiseSpec>(m, "NoiseSpec")
        .def_readonly("a1", &NoiseSpec::a1)
        .def_readonly("b1", &NoiseSpec::b1)
        .def_readonly("a0", &NoiseSpec::a0)
        .def_readonly("b0", &NoiseSpec::b0)
        .def_readonly("c", &NoiseSpec::c)
        .def_readonly("rho", &NoiseSpec::rho)
        .def_readonly("noiseless", &NoiseSpec::noiseless);

    m.def(
        "solve_noise",
        [](double b1, double rho, std::optional<double> a1, std::optional<double> c) {
            return solve_noise(b1, rho, a1, c);
        },
        py::arg("b1"), py::arg("rho"), py::arg("a1") = std::nullopt, py::arg("c") = std::nullopt);

    py::class_<Partition>(m, "Partition")
        .def(py::init([](std::vector<std::uint32_t> g, std::uint32_t k) {
                 return Partition{std::move(g), k};
             }),
             py::arg("labels"), py::arg("k"))
        .def_readonly("labels", &Partition::g)
        .def_readonly("k", &Partition::k);

    py::class_<PlantedInstance>(m, "PlantedInstance")
        .def_readonly("network", &PlantedInstance::network)
        .def_readonly("truth", &PlantedInstance::truth)
        .def_readonly("truth_edges", &PlantedInstance::truth_edges)
        .def_readonly("noise", &PlantedInstance::noise)
        .def_readonly("seed", &PlantedInstance::seed);

    m.def(
        "generate_benchmark",
        [](std::size_t n, const BlockParams& params, double b1, std::optional<double> a1,
           std::optional<double> c, bool noiseless, std::uint64_t seed) {
            NoiseRequest req;
            req.b1 = b1;
            req.a1 = a1;
            req.c = c;
            req.noiseless = noiseless;
            return generate_benchmark(n, params, req, seed);
        },
        py::arg("n"), py::arg("params"), py::arg("b1") = 0.0, py::arg("a1") = std::nullopt,
        py::arg("c") = std::nullopt, py::arg("noiseless") = false, py::arg("seed") = 0);

    py::class_<FitResult>(m, "FitResult")
        .def_property_readonly("gamma", [](const FitResult& f) { return f.params.gamma; })
        .def_property_readonly("omega", [](const FitResult& f) { return f.params.omega; })
        .def_property_readonly("k", [](const FitResult& f) { return f.params.k; })
        .def_property_readonly("hard_partition", [](const FitResult& f) { return f.hard_partition; })
        .def_property_readonly(
            "node_marginals",
            [](const FitResult& f) {
                return node_marginal_rows(f.marginals, f.hard_partition.g.size());
            })
        .def_readonly("bound_trace", &FitResult::bound_trace)
        .def_readonly("bound", &FitResult::bound)
        .def_readonly("converged", &FitResult::converged)
        .def_readonly("restarts_used", &FitResult::restarts_used)
        .def_readonly("warnings", &FitResult::warnings)
        .def_readonly("rho", &FitResult::rho);

    m.def(
        "em_fit",
        [](const UncertainNetwork& net, std::uint32_t k, const std::string& mode, int restarts,
           std::uint64_t seed, double tol_em, double tol_bp, double tol_inner, int max_iters,
           int bp_max_sweeps, double damping, int threads) {
            EmOptions opts;
            opts.restarts = restarts;
            opts.seed = seed;
            opts.tol_em = tol_em;
            opts.tol_bp = tol_bp;
            opts.tol_inner = tol_inner;
            opts.max_iters = max_iters;
            opts.bp_max_sweeps = bp_max_sweeps;
            opts.damping = damping;
            opts.threads = threads;
            return em_fit(net, k, kind_from_string(mode), opts);
        },
        py::arg("net"), py::arg("k"), py::arg("mode") = "plain", py::arg("restarts") = 10,
        py::arg("seed") = 0, py::arg("tol_em") = 1e-6, py::arg("tol_bp") = 1e-6,
        py::arg("tol_inner") = 1e-8, py::arg("max_iters") = 200, py::arg("bp_max_sweeps") = 100,
        py::arg("damping") = 0.0, py::arg("threads") = 0);

    m.def(
        "edge_posterior",
        [](const FitResult& fit, const UncertainNetwork& net) {
            const EdgeScoreList list = edge_posterior(fit, net);
            std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> out;
            out.reserve(list.scores.size());
            for (const auto& s : list.scores) out.emplace_back(s.i, s.j, s.score);
            return out;
        },
        py::arg("fit"), py::arg("net"));

    m.def(
        "roc_auc",
        [](const std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>& scores,
           const std::vector<std::pair<std::uint32_t, std::uint32_t>>& truth, std::size_t n,
           const std::string& universe) {
            EdgeScoreList list;
            for (const auto& [i, j, s] : scores) list.scores.push_back({i, j, s});
            const RocUniverse u = universe == "scored" ? RocUniverse::scored_pairs
                                                       : RocUniverse::all_pairs;
            const ROCCurve curve = roc(list, truth, n, u);
            return py::make_tuple(curve.auc, curve.points);
        },
        py::arg("scores"), py::arg("truth"), py::arg("n"), py::arg("universe") = "all");

    m.def("aligned_accuracy", &aligned_accuracy, py::arg("pred"), py::arg("truth"));
    m.def("aligned_accuracy_hungarian", &aligned_accuracy_hungarian, py::arg("pred"),
          py::arg("truth"));

    m.def("read_edgeprob_file", &read_edgeprob_file, py::arg("path"));
    m.def("write_edgeprob_file", &write_edgeprob_file, py::arg("path"), py::arg("net"));
}
