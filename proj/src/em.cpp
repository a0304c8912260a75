#include "uncnet/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "uncnet/errors.hpp"
#include "uncnet/parallel.hpp"
#include "uncnet/rng.hpp"

namespace uncnet {

namespace {

constexpr double kDcCap = 1.0 - 1e-9;

Partition argmax_partition(const Marginals& m, std::size_t n) {
    Partition part;
    part.k = m.k;
    part.g.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = m.node_row(i);
        std::uint32_t best = 0;
        for (std::uint32_t r = 1; r < m.k; ++r)
            if (row[r] > row[best]) best = r;
        part.g[i] = best;
    }
    return part;
}

struct RestartOutcome {
    FitResult fit;
    bool degenerate = false;
};

// Prior messages with Dirichlet jitter; breaks the paramagnetic symmetry that
// an exactly-uniform start never leaves.
MessageSet jittered_prior_messages(const UncertainNetwork& net, const BlockParams& params,
                                   Rng& rng) {
    const std::uint32_t k = params.k;
    MessageSet init;
    init.k = k;
    init.eta.resize(2 * net.pair_count() * k);
    std::vector<double> dir(k);
    for (std::size_t d = 0; d < 2 * net.pair_count(); ++d) {
        double dsum = 0.0;
        for (std::uint32_t r = 0; r < k; ++r) {
            dir[r] = rng.gamma(1.0);
            dsum += dir[r];
        }
        double norm = 0.0;
        for (std::uint32_t r = 0; r < k; ++r) {
            const double v = params.gamma[r] + 0.1 * (dir[r] / dsum);
            init.eta[d * k + r] = v;
            norm += v;
        }
        for (std::uint32_t r = 0; r < k; ++r) init.eta[d * k + r] /= norm;
    }
    return init;
}

} // namespace

double compute_t(double q, double omega_rs, double rho, double dd) {
    if (!(rho > 0.0) || !(rho < 1.0)) throw DegenerateRhoError(rho);
    const double w = std::min(dd * omega_rs, kDcCap);
    const double num = q * w / rho;
    const double rest = (1.0 - q) * (1.0 - w) / (1.0 - rho);
    if (num == 0.0) return 0.0;
    return num / (num + rest);
}

std::vector<double> update_gamma(const std::vector<double>& node_marginals, std::size_t n,
                                 std::uint32_t k) {
    std::vector<double> gamma(k, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::uint32_t r = 0; r < k; ++r) gamma[r] += node_marginals[i * k + r];
    for (auto& g : gamma) g /= static_cast<double>(n);
    return gamma;
}

std::vector<double> update_omega(const UncertainNetwork& net, const Marginals& marginals,
                                 double rho, const DegreeVector& degrees, BlockModelKind kind,
                                 std::vector<double> omega, double tol, int max_iters,
                                 bool* converged) {
    const std::uint32_t k = marginals.k;
    const bool dc = kind == BlockModelKind::degree_corrected;
    const std::size_t n = net.node_count();

    std::vector<double> weighted(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = dc ? degrees.d[i] : 1.0;
        for (std::uint32_t r = 0; r < k; ++r) weighted[r] += w * marginals.node[i * k + r];
    }
    std::vector<double> denom(k * k);
    for (std::uint32_t r = 0; r < k; ++r)
        for (std::uint32_t s = 0; s < k; ++s) denom[r * k + s] = weighted[r] * weighted[s];

    std::vector<double> num(k * k);
    if (converged) *converged = false;
    for (int it = 0; it < max_iters; ++it) {
        std::fill(num.begin(), num.end(), 0.0);
        for (std::size_t p = 0; p < net.pair_count(); ++p) {
            const auto& pr = net.pair(p);
            const double dd = dc ? degrees.d[pr.i] * degrees.d[pr.j] : 1.0;
            const double* tab = marginals.pair_table(p);
            for (std::uint32_t r = 0; r < k; ++r)
                for (std::uint32_t s = 0; s < k; ++s) {
                    const double t = compute_t(pr.q, omega[r * k + s], rho, dd);
                    num[r * k + s] += (tab[r * k + s] + tab[s * k + r]) * t;
                }
        }
        double change = 0.0;
        for (std::uint32_t t = 0; t < k * k; ++t) {
            const double nv = denom[t] > 0.0 ? std::clamp(num[t] / denom[t], 0.0, 1.0) : 0.0;
            change = std::max(change, std::abs(nv - omega[t]));
            omega[t] = nv;
        }
        if (change < tol) {
            if (converged) *converged = true;
            break;
        }
    }
    return omega;
}

std::vector<double> edge_posterior_tables(const UncertainNetwork& net, const BlockParams& params,
                                          double rho, const DegreeVector& degrees,
                                          BlockModelKind kind) {
    const std::uint32_t k = params.k;
    const bool dc = kind == BlockModelKind::degree_corrected;
    std::vector<double> t(net.pair_count() * k * k);
    for (std::size_t p = 0; p < net.pair_count(); ++p) {
        const auto& pr = net.pair(p);
        const double dd = dc ? degrees.d[pr.i] * degrees.d[pr.j] : 1.0;
        for (std::uint32_t r = 0; r < k; ++r)
            for (std::uint32_t s = 0; s < k; ++s)
                t[p * k * k + r * k + s] = compute_t(pr.q, params.om(r, s), rho, dd);
    }
    return t;
}

namespace {

// One full randomized-restart EM run; engine state is local to the call.
RestartOutcome run_restart(const UncertainNetwork& net, std::uint32_t k, BlockModelKind kind,
                           const DegreeVector& degrees, double rho, const EmOptions& opts,
                           std::uint64_t restart_seed, bool assortative_bias) {
    Rng rng(restart_seed);
    const std::size_t n = net.node_count();

    // In degree-corrected mode the pair probability is d_i d_j omega, so the
    // density-matched starting scale is rho / dbar^2.
    double omega_scale = rho;
    if (kind == BlockModelKind::degree_corrected) {
        double dbar = 0.0;
        for (double d : degrees.d) dbar += d;
        dbar /= static_cast<double>(n);
        if (dbar > 0.0) omega_scale = rho / (dbar * dbar);
    }

    BlockParams params;
    params.k = k;
    params.gamma.assign(k, 1.0 / k);
    params.omega.assign(static_cast<std::size_t>(k) * k, 0.0);
    for (std::uint32_t r = 0; r < k; ++r)
        for (std::uint32_t s = r; s < k; ++s) {
            const double eps = rng.uniform(-0.1, 0.1);
            double w = omega_scale * (1.0 + eps);
            if (assortative_bias && r == s) w *= 1.5;
            w = std::clamp(w, 0.0, 1.0);
            params.om(r, s) = w;
            params.om(s, r) = w;
        }

    BpEngine engine(net, params, kind, degrees, rho);
    engine.set_messages(jittered_prior_messages(net, params, rng));

    RestartOutcome out;
    FitResult& fit = out.fit;
    fit.seed = restart_seed;
    fit.rho = rho;
    fit.kind = kind;

    BpOptions bp_opts{opts.tol_bp, opts.bp_max_sweeps, opts.damping};
    bool inner_ok = true;
    bool any_bp_nonconverged = false;
    bool any_inner_nonconverged = false;

    for (int iter = 0; iter < opts.max_iters; ++iter) {
        const BpRunResult bp_res = engine.run(bp_opts);
        if (!bp_res.converged) any_bp_nonconverged = true;
        fit.bound_trace.push_back(engine.bethe_log_evidence());

        Marginals marg;
        marg.k = k;
        marg.node = engine.node_marginals();
        marg.pair = pair_marginals(net, engine.params(), degrees, kind, engine.messages(), rho);

        std::vector<double> gamma = update_gamma(marg.node, n, k);
        std::vector<double> omega = update_omega(net, marg, rho, degrees, kind,
                                                 engine.params().omega, opts.tol_inner,
                                                 opts.inner_max_iters, &inner_ok);
        if (!inner_ok) any_inner_nonconverged = true;

        double change = 0.0;
        for (std::uint32_t r = 0; r < k; ++r)
            change = std::max(change, std::abs(gamma[r] - engine.params().gamma[r]));
        for (std::uint32_t t = 0; t < k * k; ++t)
            change = std::max(change, std::abs(omega[t] - engine.params().omega[t]));

        BlockParams next;
        next.k = k;
        next.gamma = std::move(gamma);
        next.omega = std::move(omega);
        engine.set_params(std::move(next));

        if (change < opts.tol_em) {
            fit.converged = true;
            break;
        }
    }

    // Final E-step so marginals, pair tables and t correspond to the
    // converged parameters.
    engine.run(bp_opts);
    fit.params = engine.params();
    fit.marginals.k = k;
    fit.marginals.node = engine.node_marginals();
    fit.marginals.pair = pair_marginals(net, fit.params, degrees, kind, engine.messages(), rho);
    fit.t = edge_posterior_tables(net, fit.params, rho, degrees, kind);
    fit.bound = engine.bethe_log_evidence();
    fit.bound_trace.push_back(fit.bound);
    fit.hard_partition = argmax_partition(fit.marginals, n);

    if (any_bp_nonconverged) fit.warnings.push_back("bp: at least one E-step hit max_sweeps");
    if (any_inner_nonconverged)
        fit.warnings.push_back("omega: inner fixed point hit its iteration cap");

    const double collapse_floor = 1.0 / (static_cast<double>(n) * n);
    for (std::uint32_t r = 0; r < k; ++r)
        if (fit.params.gamma[r] < collapse_floor) out.degenerate = true;
    return out;
}

} // namespace

FitResult em_fit(const UncertainNetwork& net, std::uint32_t k, BlockModelKind kind,
                 const EmOptions& opts) {
    if (k == 0) throw InvalidBlockParamsError("k must be at least 1");
    const double rho = estimate_density(net);
    if (!(rho > 0.0) || !(rho < 1.0)) throw DegenerateRhoError(rho);
    const DegreeVector degrees = kind == BlockModelKind::degree_corrected
                                     ? expected_degrees(net)
                                     : DegreeVector{std::vector<double>(net.node_count(), 1.0),
                                                    DegreeMode::expected};

    const int restarts = std::max(1, opts.restarts);
    std::vector<RestartOutcome> outcomes(restarts);
    parallel_for(restarts, opts.threads, [&](std::size_t r) {
        outcomes[r] = run_restart(net, k, kind, degrees, rho, opts, derive_seed(opts.seed, r),
                                  /*assortative_bias=*/r % 2 == 0);
    });

    int best = -1;
    for (int r = 0; r < restarts; ++r) {
        if (outcomes[r].degenerate) continue;
        if (best < 0 || outcomes[r].fit.bound > outcomes[best].fit.bound) best = r;
    }
    if (best < 0)
        throw AllRestartsDegenerateError("all " + std::to_string(restarts) +
                                         " restarts collapsed a group below 1/n^2");

    FitResult fit = std::move(outcomes[best].fit);
    fit.restarts_used = restarts;
    fit.seed = opts.seed;
    int degenerate = 0;
    for (const auto& o : outcomes)
        if (o.degenerate) ++degenerate;
    if (degenerate > 0)
        fit.warnings.push_back(std::to_string(degenerate) + " of " + std::to_string(restarts) +
                               " restarts collapsed and were discarded");
    return fit;
}

FitResult e_step_at(const UncertainNetwork& net, const BlockParams& params, BlockModelKind kind,
                    const EmOptions& opts) {
    const double rho = estimate_density(net);
    if (!(rho > 0.0) || !(rho < 1.0)) throw DegenerateRhoError(rho);
    const DegreeVector degrees = kind == BlockModelKind::degree_corrected
                                     ? expected_degrees(net)
                                     : DegreeVector{std::vector<double>(net.node_count(), 1.0),
                                                    DegreeMode::expected};
    BpEngine engine(net, params, kind, degrees, rho);
    Rng rng(derive_seed(opts.seed, 0x1dea));
    engine.set_messages(jittered_prior_messages(net, params, rng));
    const BpRunResult r = engine.run({opts.tol_bp, opts.bp_max_sweeps, opts.damping});

    FitResult fit;
    fit.params = params;
    fit.kind = kind;
    fit.rho = rho;
    fit.seed = opts.seed;
    fit.converged = r.converged;
    fit.marginals.k = params.k;
    fit.marginals.node = engine.node_marginals();
    fit.marginals.pair = pair_marginals(net, params, degrees, kind, engine.messages(), rho);
    fit.t = edge_posterior_tables(net, params, rho, degrees, kind);
    fit.bound = engine.bethe_log_evidence();
    fit.bound_trace.push_back(fit.bound);
    fit.hard_partition = argmax_partition(fit.marginals, net.node_count());
    fit.restarts_used = 1;
    return fit;
}

} // namespace uncnet
