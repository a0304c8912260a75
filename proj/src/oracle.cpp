#include "uncnet/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "uncnet/em.hpp"
#include "uncnet/errors.hpp"

namespace uncnet {

namespace {

constexpr std::uint64_t kMaxAssignments = 1ull << 24;
constexpr double kDcCap = 1.0 - 1e-9;

std::uint64_t checked_assignment_count(std::size_t n, std::uint32_t k) {
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (total > kMaxAssignments / k)
            throw InstanceTooLargeError("k^n exceeds 2^24 for n=" + std::to_string(n) +
                                        ", k=" + std::to_string(k));
        total *= k;
    }
    return total;
}

// Dense matrix of stored probabilities for O(1) pair lookup on tiny n.
std::vector<double> dense_q(const UncertainNetwork& net) {
    const std::size_t n = net.node_count();
    std::vector<double> Q(n * n, 0.0);
    for (const auto& p : net.pairs()) {
        Q[p.i * n + p.j] = p.q;
        Q[p.j * n + p.i] = p.q;
    }
    return Q;
}

double pair_log_bracket(double q, double omega, double rho, double dd) {
    const double w = std::min(dd * omega, kDcCap);
    const double v = q * w / rho + (1.0 - q) * (1.0 - w) / (1.0 - rho);
    return std::log(v);
}

// Core enumerator. `log_prior` is n*k; when include_zero_pairs is false only
// stored pairs contribute factors.
PosteriorTable enumerate_core(const UncertainNetwork& net, std::uint32_t k,
                              std::span<const double> log_prior, const BlockParams& params,
                              BlockModelKind kind, const DegreeVector& degrees, double rho,
                              bool include_zero_pairs) {
    const std::size_t n = net.node_count();
    const std::uint64_t total = checked_assignment_count(n, k);
    const bool dc = kind == BlockModelKind::degree_corrected;
    const auto Q = dense_q(net);

    // Precompute per-pair log brackets over (r,s).
    const std::size_t npairs = n * (n - 1) / 2;
    std::vector<double> lb(npairs * k * k);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pair_nodes(npairs);
    {
        std::size_t p = 0;
        for (std::uint32_t i = 0; i + 1 < n; ++i)
            for (std::uint32_t j = i + 1; j < n; ++j, ++p) {
                pair_nodes[p] = {i, j};
                const double q = Q[i * n + j];
                const bool skip = !include_zero_pairs && q == 0.0;
                const double dd = dc ? degrees.d[i] * degrees.d[j] : 1.0;
                for (std::uint32_t r = 0; r < k; ++r)
                    for (std::uint32_t s = 0; s < k; ++s)
                        lb[(p * k + r) * k + s] =
                            skip ? 0.0 : pair_log_bracket(q, params.om(r, s), rho, dd);
            }
    }

    PosteriorTable table;
    table.k = k;
    table.n = n;
    table.posterior.resize(total);

    std::vector<std::uint32_t> g(n, 0);
    double max_log = -std::numeric_limits<double>::infinity();
    for (std::uint64_t a = 0; a < total; ++a) {
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) ll += log_prior[i * k + g[i]];
        std::size_t p = 0;
        for (std::uint32_t i = 0; i + 1 < n; ++i)
            for (std::uint32_t j = i + 1; j < n; ++j, ++p) ll += lb[(p * k + g[i]) * k + g[j]];
        table.posterior[a] = ll;
        max_log = std::max(max_log, ll);
        // lexicographic increment (g_0 most significant)
        for (std::size_t i = n; i-- > 0;) {
            if (++g[i] < k) break;
            g[i] = 0;
        }
    }

    double z = 0.0;
    for (double& v : table.posterior) {
        v = std::exp(v - max_log);
        z += v;
    }
    table.log_marginal_likelihood = max_log + std::log(z);
    for (double& v : table.posterior) v /= z;

    table.node_marginals.assign(n * k, 0.0);
    table.pair_marginals.assign(npairs * k * k, 0.0);
    std::fill(g.begin(), g.end(), 0);
    for (std::uint64_t a = 0; a < total; ++a) {
        const double w = table.posterior[a];
        if (w > 0.0) {
            for (std::size_t i = 0; i < n; ++i) table.node_marginals[i * k + g[i]] += w;
            std::size_t p = 0;
            for (std::uint32_t i = 0; i + 1 < n; ++i)
                for (std::uint32_t j = i + 1; j < n; ++j, ++p)
                    table.pair_marginals[(p * k + g[i]) * k + g[j]] += w;
        }
        for (std::size_t i = n; i-- > 0;) {
            if (++g[i] < k) break;
            g[i] = 0;
        }
    }
    return table;
}

} // namespace

std::size_t PosteriorTable::pair_index(std::uint32_t i, std::uint32_t j) const {
    // pairs (i,j), i<j in lexicographic order over i then j
    return static_cast<std::size_t>(i) * (2 * n - i - 1) / 2 + (j - i - 1);
}

const double* PosteriorTable::pair_table(std::uint32_t i, std::uint32_t j) const {
    return pair_marginals.data() + pair_index(i, j) * k * k;
}

double joint_log_likelihood(const UncertainNetwork& net, std::span<const std::uint32_t> g,
                            const BlockParams& params, BlockModelKind kind,
                            const DegreeVector& degrees, double rho) {
    const std::size_t n = net.node_count();
    if (g.size() != n) throw SizeMismatchError("assignment length must equal node count");
    checked_assignment_count(n, params.k);
    const bool dc = kind == BlockModelKind::degree_corrected;
    const auto Q = dense_q(net);

    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (g[i] >= params.k) throw InvalidBlockParamsError("assignment label out of range");
        ll += std::log(params.gamma[g[i]]);
    }
    for (std::uint32_t i = 0; i + 1 < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j) {
            const double dd = dc ? degrees.d[i] * degrees.d[j] : 1.0;
            ll += pair_log_bracket(Q[i * n + j], params.om(g[i], g[j]), rho, dd);
        }
    return ll;
}

PosteriorTable enumerate_posterior(const UncertainNetwork& net, std::uint32_t k,
                                   const BlockParams& params, BlockModelKind kind,
                                   const DegreeVector& degrees, double rho) {
    std::vector<double> log_prior(net.node_count() * k);
    for (std::size_t i = 0; i < net.node_count(); ++i)
        for (std::uint32_t r = 0; r < k; ++r) log_prior[i * k + r] = std::log(params.gamma[r]);
    return enumerate_core(net, k, log_prior, params, kind, degrees, rho,
                          /*include_zero_pairs=*/true);
}

FieldReference solve_field_reference(const UncertainNetwork& net, std::uint32_t k,
                                     const BlockParams& params, BlockModelKind kind,
                                     const DegreeVector& degrees, double rho, double tol,
                                     int max_iters) {
    const std::size_t n = net.node_count();
    const bool dc = kind == BlockModelKind::degree_corrected;
    std::vector<double> mu(n * k, 1.0 / k);
    std::vector<double> log_prior(n * k);
    FieldReference ref;

    PosteriorTable table;
    for (int it = 0; it < max_iters; ++it) {
        // field from current marginals
        std::vector<double> wsum(k, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double w = dc ? degrees.d[i] : 1.0;
            for (std::uint32_t s = 0; s < k; ++s) wsum[s] += w * mu[i * k + s];
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double di = dc ? degrees.d[i] : 1.0;
            for (std::uint32_t r = 0; r < k; ++r) {
                double h = 0.0;
                for (std::uint32_t s = 0; s < k; ++s) h += params.om(r, s) * wsum[s];
                log_prior[i * k + r] = std::log(params.gamma[r]) - di * h;
            }
        }
        table = enumerate_core(net, k, log_prior, params, kind, degrees, rho,
                               /*include_zero_pairs=*/false);
        // half-step damping suppresses the period-2 oscillation of the bare
        // mean-field map without moving its fixed point
        double delta = 0.0;
        for (std::size_t t = 0; t < mu.size(); ++t) {
            delta = std::max(delta, std::abs(table.node_marginals[t] - mu[t]));
            mu[t] = 0.5 * (mu[t] + table.node_marginals[t]);
        }
        ref.iterations = it + 1;
        if (delta < tol) {
            ref.converged = true;
            break;
        }
    }

    ref.node_marginals = std::move(mu);
    ref.pair_marginals.resize(net.pair_count() * k * k);
    for (std::size_t p = 0; p < net.pair_count(); ++p) {
        const auto& pr = net.pair(p);
        const double* tab = table.pair_table(pr.i, pr.j);
        std::copy(tab, tab + k * k, ref.pair_marginals.data() + p * k * k);
    }
    return ref;
}

std::vector<double> cavity_marginal(const UncertainNetwork& net, std::uint32_t k,
                                    const BlockParams& params, BlockModelKind kind,
                                    const DegreeVector& degrees, double rho,
                                    std::span<const double> field_marginals, std::uint32_t target,
                                    std::uint32_t removed) {
    const std::size_t n = net.node_count();
    const bool dc = kind == BlockModelKind::degree_corrected;

    // Field from the full-system marginals (all n nodes), as in the message
    // equations; the removed node keeps contributing to the field.
    std::vector<double> wsum(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = dc ? degrees.d[i] : 1.0;
        for (std::uint32_t s = 0; s < k; ++s) wsum[s] += w * field_marginals[i * k + s];
    }

    // Build the reduced network without `removed`.
    std::vector<std::uint32_t> remap(n, 0);
    std::uint32_t m = 0;
    for (std::uint32_t i = 0; i < n; ++i)
        if (i != removed) remap[i] = m++;
    std::vector<PairProb> pairs;
    for (const auto& p : net.pairs())
        if (p.i != removed && p.j != removed) pairs.push_back({remap[p.i], remap[p.j], p.q});
    UncertainNetwork sub = UncertainNetwork::validate(n - 1, std::move(pairs));
    DegreeVector sub_deg;
    sub_deg.mode = degrees.mode;
    for (std::uint32_t i = 0; i < n; ++i)
        if (i != removed) sub_deg.d.push_back(degrees.d.empty() ? 1.0 : degrees.d[i]);

    std::vector<double> log_prior((n - 1) * k);
    for (std::uint32_t i = 0; i < n; ++i) {
        if (i == removed) continue;
        const double di = dc ? degrees.d[i] : 1.0;
        for (std::uint32_t r = 0; r < k; ++r) {
            double h = 0.0;
            for (std::uint32_t s = 0; s < k; ++s) h += params.om(r, s) * wsum[s];
            log_prior[remap[i] * k + r] = std::log(params.gamma[r]) - di * h;
        }
    }
    PosteriorTable table = enumerate_core(sub, k, log_prior, params, kind, sub_deg, rho,
                                          /*include_zero_pairs=*/false);
    std::vector<double> out(k);
    for (std::uint32_t r = 0; r < k; ++r) out[r] = table.node_marginals[remap[target] * k + r];
    return out;
}

OracleEmResult oracle_em(const UncertainNetwork& net, std::uint32_t k, BlockParams init,
                         int max_iters, double inner_tol, int inner_iters) {
    const std::size_t n = net.node_count();
    const double rho = estimate_density(net);
    if (!(rho > 0.0) || !(rho < 1.0)) throw DegenerateRhoError(rho);
    DegreeVector ones{std::vector<double>(n, 1.0), DegreeMode::expected};

    OracleEmResult res;
    res.params = std::move(init);
    for (int iter = 0; iter < max_iters; ++iter) {
        PosteriorTable post =
            enumerate_posterior(net, k, res.params, BlockModelKind::plain, ones, rho);
        res.loglik_trace.push_back(post.log_marginal_likelihood);

        // gamma step
        for (std::uint32_t r = 0; r < k; ++r) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += post.node_marginals[i * k + r];
            res.params.gamma[r] = acc / static_cast<double>(n);
        }

        // omega step with the exact denominator over all ordered pairs.
        std::vector<double> denom(k * k, 0.0);
        for (std::uint32_t i = 0; i + 1 < n; ++i)
            for (std::uint32_t j = i + 1; j < n; ++j) {
                const double* tab = post.pair_table(i, j);
                for (std::uint32_t r = 0; r < k; ++r)
                    for (std::uint32_t s = 0; s < k; ++s)
                        denom[r * k + s] += tab[r * k + s] + tab[s * k + r];
            }
        std::vector<double> omega = res.params.omega;
        for (int inner = 0; inner < inner_iters; ++inner) {
            std::vector<double> num(k * k, 0.0);
            for (const auto& pr : net.pairs()) {
                const double* tab = post.pair_table(pr.i, pr.j);
                for (std::uint32_t r = 0; r < k; ++r)
                    for (std::uint32_t s = 0; s < k; ++s) {
                        const double t = compute_t(pr.q, omega[r * k + s], rho);
                        num[r * k + s] += (tab[r * k + s] + tab[s * k + r]) * t;
                    }
            }
            double change = 0.0;
            for (std::uint32_t t = 0; t < k * k; ++t) {
                const double nv = denom[t] > 0.0 ? std::min(num[t] / denom[t], 1.0) : 0.0;
                change = std::max(change, std::abs(nv - omega[t]));
                omega[t] = nv;
            }
            if (change < inner_tol) break;
        }
        res.params.omega = std::move(omega);
    }
    res.posterior = enumerate_posterior(net, k, res.params, BlockModelKind::plain, ones, rho);
    res.loglik_trace.push_back(res.posterior.log_marginal_likelihood);
    return res;
}

} // namespace uncnet
