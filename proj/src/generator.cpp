#include "uncnet/generator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_set>

#include "uncnet/errors.hpp"

namespace uncnet {

namespace {

constexpr double kSimplexTol = 1e-12;
constexpr double kMinShape = 1e-6;

void check_simplex(std::span<const double> gamma) {
    if (gamma.empty()) throw InvalidSimplexError("gamma is empty");
    double sum = 0.0;
    for (double g : gamma) {
        if (g < 0.0) throw InvalidSimplexError("gamma has a negative entry");
        sum += g;
    }
    if (std::abs(sum - 1.0) > kSimplexTol)
        throw InvalidSimplexError("gamma sums to " + std::to_string(sum) + ", expected 1");
}

double log_beta_fn(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Decodes linear index L of the pair enumeration (a<b), L = b(b-1)/2 + a.
std::pair<std::uint64_t, std::uint64_t> decode_within(std::uint64_t L) {
    auto b = static_cast<std::uint64_t>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(L))) / 2.0);
    while (b * (b - 1) / 2 > L) --b;
    while ((b + 1) * b / 2 <= L) ++b;
    return {L - b * (b - 1) / 2, b};
}

} // namespace

BlockParams BlockParams::validate(std::uint32_t k, std::vector<double> gamma,
                                  std::vector<double> omega) {
    if (k == 0) throw InvalidBlockParamsError("k must be at least 1");
    if (gamma.size() != k) throw InvalidBlockParamsError("gamma must have length k");
    if (omega.size() != static_cast<std::size_t>(k) * k)
        throw InvalidBlockParamsError("omega must be k x k");
    check_simplex(gamma);
    for (std::uint32_t r = 0; r < k; ++r) {
        for (std::uint32_t s = 0; s < k; ++s) {
            const double w = omega[r * k + s];
            if (!(w >= 0.0) || w > 1.0)
                throw InvalidBlockParamsError("omega entries must lie in [0,1]");
            if (w != omega[s * k + r]) throw InvalidBlockParamsError("omega must be symmetric");
        }
    }
    BlockParams p;
    p.k = k;
    p.gamma = std::move(gamma);
    p.omega = std::move(omega);
    return p;
}

BlockParams BlockParams::two_group(double om_in, double om_out) {
    return validate(2, {0.5, 0.5}, {om_in, om_out, om_out, om_in});
}

NoiseSpec NoiseSpec::exact() {
    NoiseSpec s;
    s.noiseless = true;
    return s;
}

NoiseSpec solve_noise(double b1, double rho, std::optional<double> a1_opt,
                      std::optional<double> c_opt) {
    if (!(b1 > 0.0)) throw InvalidShapeError("b1 must be positive");
    if (!(rho > 0.0) || !(rho < 1.0)) throw DegenerateRhoError(rho);
    if (a1_opt.has_value() == c_opt.has_value())
        throw InvalidShapeError("exactly one of a1 or c must be given");

    NoiseSpec s;
    s.b1 = b1;
    s.rho = rho;
    const double ratio = rho / (1.0 - rho);

    if (a1_opt) {
        s.a1 = *a1_opt;
        if (!(s.a1 > 1.0)) throw InvalidShapeError("a1 must exceed 1");
        // Matching beta1/beta0 against the required odds ratio fixes c.
        // (The closed form is checked against the grid below.)
        s.c = ratio * b1 / (s.a1 - 1.0);
        if (!(s.c > 0.0) || s.c > 1.0) throw InfeasibleNoiseError(s.c);
    } else {
        s.c = *c_opt;
        if (!(s.c > 0.0) || s.c > 1.0) throw InfeasibleNoiseError(s.c);
        s.a1 = 1.0 + ratio * b1 / s.c;
    }
    s.a0 = s.a1 - 1.0;
    s.b0 = s.b1 + 1.0;
    if (s.a0 < kMinShape)
        throw InvalidShapeError("solved a0=" + std::to_string(s.a0) + " below " +
                                std::to_string(kMinShape));

    if (noise_consistency_error(s) > 1e-9)
        throw InvalidShapeError("solved noise fails the consistency grid check");
    return s;
}

double noise_consistency_error(const NoiseSpec& spec, std::span<const double> q_grid) {
    if (spec.noiseless) return 0.0;
    static constexpr std::array<double, 19> kDefaultGrid = {
        0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50,
        0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
    std::span<const double> grid = q_grid.empty() ? std::span<const double>(kDefaultGrid) : q_grid;

    const double lB1 = log_beta_fn(spec.a1, spec.b1);
    const double lB0 = log_beta_fn(spec.a0, spec.b0);
    double worst = 0.0;
    for (double q : grid) {
        const double log_beta1 = (spec.a1 - 1.0) * std::log(q) + (spec.b1 - 1.0) * std::log1p(-q) - lB1;
        const double log_beta0 =
            std::log(spec.c) + (spec.a0 - 1.0) * std::log(q) + (spec.b0 - 1.0) * std::log1p(-q) - lB0;
        const double lhs = log_beta1 - log_beta0;
        const double rhs = std::log(q / spec.rho) - std::log((1.0 - q) / (1.0 - spec.rho));
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
    return worst;
}

Partition sample_partition(std::size_t n, std::span<const double> gamma, Rng& rng) {
    check_simplex(gamma);
    Partition part;
    part.k = static_cast<std::uint32_t>(gamma.size());
    part.g.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        double cum = 0.0;
        std::uint32_t pick = part.k - 1;
        for (std::uint32_t r = 0; r < part.k; ++r) {
            cum += gamma[r];
            if (u < cum) {
                pick = r;
                break;
            }
        }
        part.g[i] = pick;
    }
    return part;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> sample_network(const Partition& partition,
                                                                    const BlockParams& params,
                                                                    Rng& rng) {
    const std::uint32_t k = params.k;
    for (std::uint32_t label : partition.g)
        if (label >= k) throw InvalidBlockParamsError("partition label out of range");

    std::vector<std::vector<std::uint32_t>> members(k);
    for (std::uint32_t i = 0; i < partition.g.size(); ++i) members[partition.g[i]].push_back(i);

    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (std::uint32_t r = 0; r < k; ++r) {
        for (std::uint32_t s = r; s < k; ++s) {
            const double p = params.om(r, s);
            if (p <= 0.0) continue;
            const auto& A = members[r];
            const auto& B = members[s];
            const std::uint64_t total = (r == s)
                                            ? static_cast<std::uint64_t>(A.size()) * (A.size() - 1) / 2
                                            : static_cast<std::uint64_t>(A.size()) * B.size();
            if (total == 0) continue;
            std::uint64_t pos = 0;
            for (;;) {
                const std::uint64_t gap = (p >= 1.0) ? 0 : rng.geometric(p);
                if (gap >= total - pos) break;
                pos += gap;
                std::uint32_t a, b;
                if (r == s) {
                    auto [x, y] = decode_within(pos);
                    a = A[x];
                    b = A[y];
                } else {
                    a = A[pos / B.size()];
                    b = B[pos % B.size()];
                }
                edges.emplace_back(std::min(a, b), std::max(a, b));
                if (++pos >= total) break;
            }
        }
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

UncertainNetwork apply_noise(std::span<const std::pair<std::uint32_t, std::uint32_t>> edges,
                             std::size_t n, const NoiseSpec& noise, Rng& rng) {
    std::vector<PairProb> pairs;
    pairs.reserve(edges.size());

    if (noise.noiseless) {
        for (const auto& [i, j] : edges) pairs.push_back({i, j, 1.0});
        return UncertainNetwork::validate(n, std::move(pairs));
    }

    for (const auto& [i, j] : edges) {
        double q = rng.beta(noise.a1, noise.b1);
        q = std::min(q, 1.0);
        if (q <= 0.0) q = 1e-15;  // beta1(0) = 0; keep true edges stored
        pairs.push_back({i, j, q});
    }

    const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    const std::uint64_t non_edges = total - edges.size();
    const std::uint64_t want = rng.binomial(non_edges, noise.c);

    std::unordered_set<std::uint64_t> edge_keys;
    edge_keys.reserve(edges.size() * 2);
    for (const auto& [i, j] : edges) edge_keys.insert(static_cast<std::uint64_t>(i) * n + j);

    std::vector<std::pair<std::uint32_t, std::uint32_t>> chosen;
    chosen.reserve(want);
    if (want * 2 >= non_edges) {
        // Dense request: enumerate all non-edges, then keep a uniform subset
        // via partial Fisher-Yates.
        std::vector<std::uint64_t> all;
        all.reserve(non_edges);
        for (std::uint32_t i = 0; i + 1 < n; ++i)
            for (std::uint32_t j = i + 1; j < n; ++j)
                if (!edge_keys.contains(static_cast<std::uint64_t>(i) * n + j))
                    all.push_back(static_cast<std::uint64_t>(i) * n + j);
        for (std::uint64_t t = 0; t < want; ++t) {
            const std::uint64_t pick = t + rng.below(all.size() - t);
            std::swap(all[t], all[pick]);
            chosen.emplace_back(static_cast<std::uint32_t>(all[t] / n),
                                static_cast<std::uint32_t>(all[t] % n));
        }
    } else {
        std::unordered_set<std::uint64_t> used;
        used.reserve(want * 2);
        while (chosen.size() < want) {
            const auto [a, b] = decode_within(rng.below(total));
            const std::uint64_t key = a * n + b;
            if (edge_keys.contains(key) || !used.insert(key).second) continue;
            chosen.emplace_back(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
        }
    }

    for (const auto& [i, j] : chosen) {
        double q = rng.beta(noise.a0, noise.b0);
        if (q <= 0.0) continue;                    // the delta spike owns q = 0
        if (q >= 1.0) q = 1.0 - 1e-12;             // beta0(1) = 0
        pairs.push_back({i, j, q});
    }
    return UncertainNetwork::validate(n, std::move(pairs));
}

PlantedInstance generate_benchmark(std::size_t n, const BlockParams& params,
                                   const NoiseRequest& request, std::uint64_t seed) {
    Rng rng(seed);
    Partition truth = sample_partition(n, params.gamma, rng);
    auto edges = sample_network(truth, params, rng);

    NoiseSpec spec;
    if (request.noiseless) {
        spec = NoiseSpec::exact();
    } else {
        const double rho =
            static_cast<double>(edges.size()) / (static_cast<double>(n) * (n - 1) / 2.0);
        spec = solve_noise(request.b1, rho, request.a1, request.c);
    }

    PlantedInstance inst{apply_noise(edges, n, spec, rng), std::move(truth), std::move(edges),
                         params, spec, seed};
    return inst;
}

} // namespace uncnet
