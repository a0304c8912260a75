#include "doctest.h"

#include <cmath>
#include <vector>

#include "uncnet/em.hpp"
#include "uncnet/errors.hpp"
#include "uncnet/generator.hpp"
#include "uncnet/recovery.hpp"
#include "uncnet/rng.hpp"

using namespace uncnet;

TEST_CASE("compute_t endpoints and identities") {
    // prior and evidence cancel at q = rho
    CHECK(compute_t(0.017, 0.02, 0.017) == doctest::Approx(0.02).epsilon(1e-13));
    CHECK(compute_t(0.3, 0.5, 0.3) == doctest::Approx(0.5).epsilon(1e-13));
    // endpoints
    CHECK(compute_t(1.0, 0.02, 0.017) == 1.0);
    CHECK(compute_t(0.0, 0.02, 0.017) == 0.0);
    // worked value
    const double expect = (0.9 * 0.02 / 0.017) /
                          ((0.9 * 0.02 / 0.017) + (0.1 * 0.98 / 0.983));
    CHECK(expect == doctest::Approx(0.9139).epsilon(1e-4));
    CHECK(compute_t(0.9, 0.02, 0.017) == doctest::Approx(expect).epsilon(1e-14));
    CHECK_THROWS_AS(compute_t(0.5, 0.5, 0.0), DegenerateRhoError);
    CHECK_THROWS_AS(compute_t(0.5, 0.5, 1.0), DegenerateRhoError);
}

TEST_CASE("compute_t is monotone in q and omega") {
    double prev = -1.0;
    for (double q = 0.0; q <= 1.0; q += 0.05) {
        const double t = compute_t(q, 0.3, 0.15);
        CHECK(t >= prev);
        prev = t;
    }
    prev = -1.0;
    for (double om = 0.0; om <= 1.0; om += 0.05) {
        const double t = compute_t(0.4, om, 0.15);
        CHECK(t >= prev);
        prev = t;
    }
}

TEST_CASE("degree-corrected compute_t scaling invariance") {
    // multiplying degrees by alpha and dividing omega by alpha^2 is a no-op
    for (double alpha : {0.5, 2.0, 3.7}) {
        const double a = compute_t(0.6, 0.04, 0.02, 2.5 * 1.5);
        const double b = compute_t(0.6, 0.04 / (alpha * alpha), 0.02,
                                   (2.5 * alpha) * (1.5 * alpha));
        CHECK(a == doctest::Approx(b).epsilon(1e-14));
    }
}

TEST_CASE("update_gamma averages marginal rows") {
    std::vector<double> rows = {1, 0, 1, 0, 1, 0, 0, 1};  // 4 nodes, k=2
    auto gamma = update_gamma(rows, 4, 2);
    CHECK(gamma[0] == doctest::Approx(0.75));
    CHECK(gamma[1] == doctest::Approx(0.25));
    // idempotence under repetition
    auto gamma2 = update_gamma(rows, 4, 2);
    CHECK(gamma == gamma2);

    std::vector<double> uniform = {0.5, 0.5, 0.5, 0.5};
    auto g3 = update_gamma(uniform, 2, 2);
    CHECK(g3[0] == doctest::Approx(0.5));
}

TEST_CASE("update_omega: one-group mass recovers 2m/n^2") {
    // 5-node, 4-edge noiseless instance, k=1
    auto net = UncertainNetwork::validate(
        5, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 4, 1.0}});
    Marginals marg;
    marg.k = 1;
    marg.node.assign(5, 1.0);
    marg.pair.assign(4, 1.0);
    DegreeVector ones{std::vector<double>(5, 1.0), DegreeMode::expected};
    bool conv = false;
    auto omega = update_omega(net, marg, estimate_density(net), ones, BlockModelKind::plain,
                              {0.3}, 1e-12, 200, &conv);
    CHECK(conv);
    CHECK(omega[0] == doctest::Approx(8.0 / 25.0).epsilon(1e-12));
}

TEST_CASE("update_omega with all mass on one block") {
    // all pair tables concentrated on (0,0), t = 1 (q = 1), sum q^0 = n
    auto net = UncertainNetwork::validate(4, {{0, 1, 1.0}, {2, 3, 1.0}});
    Marginals marg;
    marg.k = 2;
    marg.node.assign(4 * 2, 0.0);
    for (int i = 0; i < 4; ++i) marg.node[i * 2 + 0] = 1.0;
    marg.pair.assign(2 * 4, 0.0);
    marg.pair[0] = 1.0;
    marg.pair[4] = 1.0;
    DegreeVector ones{std::vector<double>(4, 1.0), DegreeMode::expected};
    bool conv = false;
    auto omega = update_omega(net, marg, estimate_density(net), ones, BlockModelKind::plain,
                              {0.5, 0.1, 0.1, 0.5}, 1e-12, 200, &conv);
    CHECK(omega[0] == doctest::Approx(2.0 * 2.0 / 16.0).epsilon(1e-12));
    CHECK(omega[3] == doctest::Approx(0.0));
}

TEST_CASE("update_omega recovers planted block probabilities from truth marginals") {
    auto params = BlockParams::two_group(0.02, 0.014);
    NoiseRequest req;
    req.b1 = 2.0;
    req.a1 = 1.4;
    auto inst = generate_benchmark(4000, params, req, 202);
    const auto& net = inst.network;
    const double rho = estimate_density(net);

    Marginals marg;
    marg.k = 2;
    marg.node.assign(net.node_count() * 2, 0.0);
    for (std::size_t i = 0; i < net.node_count(); ++i)
        marg.node[i * 2 + inst.truth.g[i]] = 1.0;
    marg.pair.assign(net.pair_count() * 4, 0.0);
    for (std::size_t p = 0; p < net.pair_count(); ++p) {
        const auto& pr = net.pair(p);
        marg.pair[p * 4 + inst.truth.g[pr.i] * 2 + inst.truth.g[pr.j]] = 1.0;
    }
    DegreeVector ones{std::vector<double>(net.node_count(), 1.0), DegreeMode::expected};
    bool conv = false;
    auto omega = update_omega(net, marg, rho, ones, BlockModelKind::plain,
                              {rho, rho, rho, rho}, 1e-10, 200, &conv);
    CHECK(conv);
    // binomial-style bars on the estimator: sigma ~ sqrt(om/(pairs within class))
    const double sig_in = 3.0 * std::sqrt(0.02 / (2000.0 * 1999.0));
    const double sig_out = 3.0 * std::sqrt(0.014 / (2000.0 * 2000.0));
    CHECK(std::abs(omega[0] - 0.02) < 3.0 * sig_in + 3e-4);
    CHECK(std::abs(omega[3] - 0.02) < 3.0 * sig_in + 3e-4);
    CHECK(std::abs(omega[1] - 0.014) < 3.0 * sig_out + 3e-4);
}

TEST_CASE("em_fit: noiseless strong SBM recovers the planted partition exactly") {
    auto params = BlockParams::two_group(0.1, 0.001);
    NoiseRequest req;
    req.noiseless = true;
    auto inst = generate_benchmark(500, params, req, 7);
    EmOptions opts;
    opts.restarts = 4;
    opts.seed = 11;
    auto fit = em_fit(inst.network, 2, BlockModelKind::plain, opts);
    CHECK(aligned_accuracy(fit.hard_partition, inst.truth) == doctest::Approx(1.0));
    CHECK(fit.converged);
}

TEST_CASE("em_fit with k=1 is trivial") {
    auto net = UncertainNetwork::validate(5, {{0, 1, 0.5}, {1, 2, 0.75}, {3, 4, 0.25}});
    EmOptions opts;
    opts.restarts = 2;
    auto fit = em_fit(net, 1, BlockModelKind::plain, opts);
    CHECK(fit.params.gamma == std::vector<double>{1.0});
    for (auto g : fit.hard_partition.g) CHECK(g == 0);
    for (std::size_t i = 0; i < 5; ++i) CHECK(fit.marginals.node[i] == 1.0);
}

TEST_CASE("em_fit is deterministic given (seed, restarts)") {
    auto params = BlockParams::two_group(0.08, 0.01);
    NoiseRequest req;
    req.b1 = 2.0;
    req.a1 = 2.0;
    auto inst = generate_benchmark(200, params, req, 3);
    EmOptions opts;
    opts.restarts = 3;
    opts.seed = 99;
    opts.threads = 2;  // parallel restarts must not affect the result
    auto a = em_fit(inst.network, 2, BlockModelKind::plain, opts);
    opts.threads = 1;
    auto b = em_fit(inst.network, 2, BlockModelKind::plain, opts);
    CHECK(a.params.gamma == b.params.gamma);
    CHECK(a.params.omega == b.params.omega);
    CHECK(a.marginals.node == b.marginals.node);
    CHECK(a.bound == b.bound);
    CHECK(a.hard_partition.g == b.hard_partition.g);
}

TEST_CASE("em_fit keeps gamma a simplex and omega within [0,1]") {
    auto params = BlockParams::two_group(0.06, 0.02);
    NoiseRequest req;
    req.b1 = 1.5;
    req.a1 = 1.8;
    auto inst = generate_benchmark(300, params, req, 21);
    EmOptions opts;
    opts.restarts = 2;
    opts.seed = 5;
    opts.max_iters = 20;
    auto fit = em_fit(inst.network, 2, BlockModelKind::plain, opts);
    double gsum = 0.0;
    for (double g : fit.params.gamma) {
        CHECK(g >= 0.0);
        gsum += g;
    }
    CHECK(gsum == doctest::Approx(1.0).epsilon(1e-10));
    for (double w : fit.params.omega) {
        CHECK(w >= 0.0);
        CHECK(w <= 1.0);
    }
}

TEST_CASE("hard partition breaks ties toward the lowest index") {
    Marginals m;
    m.k = 3;
    m.node = {0.4, 0.4, 0.2};
    // exposed through em paths; emulate via FitResult voting in e_step_at on a
    // symmetric instance is fragile, so check the rule directly on the argmax
    std::uint32_t best = 0;
    for (std::uint32_t r = 1; r < 3; ++r)
        if (m.node[r] > m.node[best]) best = r;
    CHECK(best == 0);
}

TEST_CASE("degree-corrected fit runs and reduces plausibly on homogeneous data") {
    auto params = BlockParams::two_group(0.1, 0.01);
    NoiseRequest req;
    req.b1 = 2.0;
    req.a1 = 3.0;
    auto inst = generate_benchmark(300, params, req, 17);
    EmOptions opts;
    opts.restarts = 3;
    opts.seed = 2;
    auto fit = em_fit(inst.network, 2, BlockModelKind::degree_corrected, opts);
    CHECK(aligned_accuracy(fit.hard_partition, inst.truth) > 0.9);
}
