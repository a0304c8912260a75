#include "doctest.h"

#include <cmath>
#include <set>
#include <unordered_set>

#include "uncnet/errors.hpp"
#include "uncnet/generator.hpp"
#include "uncnet/rng.hpp"

using namespace uncnet;

namespace {

// Independent coefficient-matching oracle: substitute the two beta densities
// into the required density ratio at a probe value Q and solve for c.
double solve_c_by_matching(double a1, double b1, double rho, double q) {
    auto log_beta_fn = [](double a, double b) {
        return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    };
    const double a0 = a1 - 1.0, b0 = b1 + 1.0;
    const double log_b1_density =
        (a1 - 1.0) * std::log(q) + (b1 - 1.0) * std::log1p(-q) - log_beta_fn(a1, b1);
    const double log_b0_unit =
        (a0 - 1.0) * std::log(q) + (b0 - 1.0) * std::log1p(-q) - log_beta_fn(a0, b0);
    const double log_required_ratio =
        std::log(q / rho) - std::log((1.0 - q) / (1.0 - rho));
    // beta1 / (c * beta0_unit) = required  =>  c = beta1 / (beta0_unit * required)
    return std::exp(log_b1_density - log_b0_unit - log_required_ratio);
}

} // namespace

TEST_CASE("solve_noise matches the coefficient-matching oracle (fig-2a model)") {
    const double rho = 0.017;
    auto spec = solve_noise(2.0, rho, 1.4, std::nullopt);
    CHECK(spec.a0 == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(spec.b0 == doctest::Approx(3.0).epsilon(1e-12));
    // several probe values must give the same c
    for (double q : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        CHECK(spec.c == doctest::Approx(solve_c_by_matching(1.4, 2.0, rho, q)).epsilon(1e-9));
    }
    CHECK(spec.c == doctest::Approx(0.0865).epsilon(2e-3));
    CHECK(noise_consistency_error(spec) < 1e-9);
}

TEST_CASE("solve_noise with rho=0.5, a1=2, b1=1") {
    auto spec = solve_noise(1.0, 0.5, 2.0, std::nullopt);
    CHECK(spec.a0 == doctest::Approx(1.0));
    CHECK(spec.b0 == doctest::Approx(2.0));
    CHECK(spec.c == doctest::Approx(solve_c_by_matching(2.0, 1.0, 0.5, 0.35)).epsilon(1e-9));
    CHECK(noise_consistency_error(spec) < 1e-9);
}

TEST_CASE("solve_noise rejects infeasible and degenerate requests") {
    // a1 -> 1+ with c solved: c explodes past 1
    CHECK_THROWS_AS(solve_noise(2.0, 0.5, 1.05, std::nullopt), InfeasibleNoiseError);
    CHECK_THROWS_AS(solve_noise(2.0, 0.017, 1.0 + 5e-7, std::nullopt), InfeasibleNoiseError);
    // solved a0 below the shape floor (c given, nearly empty network)
    CHECK_THROWS_AS(solve_noise(1.0, 1e-7, std::nullopt, 1.0), InvalidShapeError);
    CHECK_THROWS_AS(solve_noise(2.0, 0.017, std::nullopt, 1.5), InfeasibleNoiseError);
    CHECK_THROWS_AS(solve_noise(-1.0, 0.017, 1.4, std::nullopt), InvalidShapeError);
    CHECK_THROWS_AS(solve_noise(2.0, 0.0, 1.4, std::nullopt), DegenerateRhoError);
}

TEST_CASE("solve_noise consistency holds on the full default grid") {
    for (double rho : {0.01, 0.1, 0.4}) {
        for (double b1 : {0.5, 2.0, 6.0}) {
            auto spec = solve_noise(b1, rho, std::nullopt, 0.2);
            CHECK(noise_consistency_error(spec) < 1e-9);
            CHECK(spec.a1 > 1.0);
        }
    }
}

TEST_CASE("sample_partition degenerate and statistical cases") {
    Rng rng(1);
    auto all0 = sample_partition(50, std::vector<double>{1.0}, rng);
    for (auto g : all0.g) CHECK(g == 0);

    auto all1 = sample_partition(50, std::vector<double>{0.0, 1.0}, rng);
    for (auto g : all1.g) CHECK(g == 1);

    // binomial oracle: group-0 count within 4 sigma of n/2
    auto part = sample_partition(4000, std::vector<double>{0.5, 0.5}, rng);
    std::size_t count0 = 0;
    for (auto g : part.g) count0 += g == 0;
    const double sigma = std::sqrt(4000 * 0.25);
    CHECK(std::abs(static_cast<double>(count0) - 2000.0) < 4.0 * sigma);

    CHECK_THROWS_AS(sample_partition(10, std::vector<double>{0.4, 0.4}, rng),
                    InvalidSimplexError);
}

TEST_CASE("sample_network edge cases") {
    Rng rng(2);
    auto params0 = BlockParams::validate(2, {0.5, 0.5}, {0, 0, 0, 0});
    Partition part{std::vector<std::uint32_t>(20, 0), 2};
    for (std::size_t i = 10; i < 20; ++i) part.g[i] = 1;
    CHECK(sample_network(part, params0, rng).empty());

    auto params1 = BlockParams::validate(2, {0.5, 0.5}, {1, 1, 1, 1});
    auto edges = sample_network(part, params1, rng);
    CHECK(edges.size() == 20 * 19 / 2);
    std::set<std::pair<std::uint32_t, std::uint32_t>> uniq(edges.begin(), edges.end());
    CHECK(uniq.size() == edges.size());
}

TEST_CASE("sample_network edge count matches the closed-form expectation (fig-2a)") {
    Rng rng(3);
    auto params = BlockParams::two_group(0.02, 0.014);
    Partition part{std::vector<std::uint32_t>(4000, 0), 2};
    for (std::size_t i = 2000; i < 4000; ++i) part.g[i] = 1;
    auto edges = sample_network(part, params, rng);
    // E = 2*C(2000,2)*0.02 + 2000^2*0.014 = 135,960; sigma ~ sqrt(E*(1-p)) ~ 366
    const double expected = 2.0 * (2000.0 * 1999.0 / 2.0) * 0.02 + 2000.0 * 2000.0 * 0.014;
    CHECK(expected == doctest::Approx(135960.0));
    CHECK(std::abs(static_cast<double>(edges.size()) - expected) < 4.0 * 366.0);
    // simple and undirected
    for (const auto& [i, j] : edges) CHECK(i < j);
}

TEST_CASE("apply_noise stored-pair count follows the binomial oracle") {
    Rng rng(4);
    const std::size_t n = 600;
    auto params = BlockParams::two_group(0.05, 0.01);
    Partition part{std::vector<std::uint32_t>(n, 0), 2};
    for (std::size_t i = n / 2; i < n; ++i) part.g[i] = 1;
    auto edges = sample_network(part, params, rng);
    const double total = n * (n - 1) / 2.0;
    const double rho = edges.size() / total;
    auto spec = solve_noise(2.0, rho, std::nullopt, 0.3);
    auto net = apply_noise(edges, n, spec, rng);
    const double expect = edges.size() + spec.c * (total - edges.size());
    const double sigma = std::sqrt(spec.c * (1 - spec.c) * (total - edges.size()));
    CHECK(std::abs(static_cast<double>(net.pair_count()) - expect) < 4.0 * sigma);
    for (const auto& p : net.pairs()) {
        CHECK(p.q > 0.0);
        CHECK(p.q <= 1.0);
    }
}

TEST_CASE("apply_noise noiseless limit reproduces the adjacency exactly") {
    Rng rng(5);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges = {{0, 1}, {1, 2}, {3, 4}};
    auto net = apply_noise(edges, 5, NoiseSpec::exact(), rng);
    REQUIRE(net.pair_count() == 3);
    for (const auto& p : net.pairs()) CHECK(p.q == 1.0);
}

TEST_CASE("apply_noise on an empty edge set draws only non-edge noise") {
    Rng rng(6);
    NoiseSpec spec;
    spec.a1 = 2.0;
    spec.b1 = 1.0;
    spec.a0 = 1.0;
    spec.b0 = 2.0;
    spec.c = 0.5;
    spec.rho = 0.5;
    auto net = apply_noise({}, 4, spec, rng);
    CHECK(net.pair_count() <= 6);
    for (const auto& p : net.pairs()) {
        CHECK(p.q > 0.0);
        CHECK(p.q < 1.0);
    }
}

TEST_CASE("generate_benchmark is reproducible bit-for-bit") {
    auto params = BlockParams::two_group(0.05, 0.01);
    NoiseRequest req;
    req.b1 = 2.0;
    req.a1 = 1.4;
    auto a = generate_benchmark(300, params, req, 123);
    auto b = generate_benchmark(300, params, req, 123);
    REQUIRE(a.network.pair_count() == b.network.pair_count());
    for (std::size_t p = 0; p < a.network.pair_count(); ++p) {
        CHECK(a.network.pair(p).i == b.network.pair(p).i);
        CHECK(a.network.pair(p).j == b.network.pair(p).j);
        CHECK(a.network.pair(p).q == b.network.pair(p).q);  // bit-identical
    }
    CHECK(a.truth.g == b.truth.g);
    CHECK(a.truth_edges == b.truth_edges);

    auto c = generate_benchmark(300, params, req, 124);
    bool same = a.network.pair_count() == c.network.pair_count();
    if (same)
        for (std::size_t p = 0; p < a.network.pair_count() && same; ++p)
            same = a.network.pair(p).q == c.network.pair(p).q;
    CHECK_FALSE(same);
}

TEST_CASE("very sparse c request solves to a sharply peaked edge density") {
    // tiny c forces a1 up; the solved spec still satisfies the constraint
    const std::size_t n = 800;
    auto params = BlockParams::two_group(0.05, 0.001);
    NoiseRequest req;
    req.b1 = 4.0;
    req.c = 1.0 / (4.0 * static_cast<double>(n));
    auto inst = generate_benchmark(n, params, req, 12);
    CHECK(inst.noise.a1 > 50.0);
    CHECK(noise_consistency_error(inst.noise) < 1e-9);
    // nearly every stored pair is a true edge at this sparsity
    CHECK(inst.network.pair_count() <
          inst.truth_edges.size() + 12 + static_cast<std::size_t>(
              2.0 * req.c.value() * static_cast<double>(n) * (n - 1) / 2.0));
}

TEST_CASE("single-group model degenerates to an Erdos-Renyi draw") {
    auto params = BlockParams::validate(1, {1.0}, {0.05});
    NoiseRequest req;
    req.b1 = 2.0;
    req.a1 = 2.0;
    auto inst = generate_benchmark(400, params, req, 19);
    for (auto g : inst.truth.g) CHECK(g == 0);
    const double expect = 0.05 * (400.0 * 399.0 / 2.0);
    CHECK(std::abs(static_cast<double>(inst.truth_edges.size()) - expect) <
          4.0 * std::sqrt(expect));
}

TEST_CASE("every true edge keeps a positive stored probability") {
    auto params = BlockParams::two_group(0.1, 0.02);
    NoiseRequest req;
    req.b1 = 3.0;
    req.a1 = 1.5;
    auto inst = generate_benchmark(400, params, req, 9);
    std::unordered_set<std::uint64_t> stored;
    for (const auto& p : inst.network.pairs())
        stored.insert(static_cast<std::uint64_t>(p.i) * 400 + p.j);
    for (const auto& [i, j] : inst.truth_edges)
        CHECK(stored.contains(static_cast<std::uint64_t>(i) * 400 + j));
}

TEST_CASE("bin consistency: edge fraction tracks mean q per decile") {
    auto params = BlockParams::two_group(0.02, 0.014);
    NoiseRequest req;
    req.b1 = 2.0;
    req.a1 = 1.4;
    auto inst = generate_benchmark(4000, params, req, 31);
    std::unordered_set<std::uint64_t> truth;
    for (const auto& [i, j] : inst.truth_edges)
        truth.insert(static_cast<std::uint64_t>(i) * 4000 + j);

    struct Bin {
        double qsum = 0.0;
        std::size_t count = 0, edges = 0;
    };
    Bin bins[10];
    for (const auto& p : inst.network.pairs()) {
        int b = std::min(9, static_cast<int>(p.q * 10.0));
        bins[b].qsum += p.q;
        bins[b].count += 1;
        bins[b].edges += truth.contains(static_cast<std::uint64_t>(p.i) * 4000 + p.j);
    }
    for (const auto& bin : bins) {
        if (bin.count < 50) continue;
        const double mean_q = bin.qsum / bin.count;
        const double frac = static_cast<double>(bin.edges) / bin.count;
        const double se = std::sqrt(mean_q * (1.0 - mean_q) / bin.count);
        CHECK(std::abs(frac - mean_q) <= 4.0 * se);
    }
}
