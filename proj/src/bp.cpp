#include "uncnet/bp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "uncnet/errors.hpp"

namespace uncnet {

namespace {

constexpr double kMantissaLo = 1e-150;
constexpr double kMantissaHi = 1e150;
constexpr double kDcCap = 1.0 - 1e-9;

// Rescale step used by the running products; exponents are decimal.
inline double pow10_int(int e) { return e == 0 ? 1.0 : std::pow(10.0, e); }

} // namespace

BpEngine::BpEngine(const UncertainNetwork& net, BlockParams params, BlockModelKind kind,
                   DegreeVector degrees, double rho)
    : net_(net), params_(std::move(params)), kind_(kind), degrees_(std::move(degrees)), rho_(rho) {
    if (!(rho_ > 0.0) || !(rho_ < 1.0)) throw DegenerateRhoError(rho_);
    if (kind_ == BlockModelKind::degree_corrected && degrees_.d.size() != net_.node_count())
        throw SizeMismatchError("degree vector length must match node count");
    const std::uint32_t k = params_.k;
    messages_.k = k;
    messages_.eta.assign(2 * net_.pair_count() * k, 1.0 / k);
    node_marg_.assign(net_.node_count() * k, 1.0 / k);
    B_.resize(k);
    prod_m_.resize(k);
    prod_e_.resize(k);
    zero_cnt_.resize(k);
    base_.resize(k);
    scratch_.resize(k);
    build_tables();
    refresh_field();
    for (std::uint32_t i = 0; i < net_.node_count(); ++i) refresh_node_marginal(i);
}

BpEngine::BpEngine(const UncertainNetwork& net, BlockParams params, double rho)
    : BpEngine(net, std::move(params), BlockModelKind::plain,
               DegreeVector{std::vector<double>(net.node_count(), 1.0), DegreeMode::expected},
               rho) {}

void BpEngine::build_tables() {
    const std::size_t n = net_.node_count();
    he_offsets_.assign(n + 1, 0);
    half_edges_.clear();
    half_edges_.reserve(2 * net_.pair_count());
    std::size_t max_deg = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
        he_offsets_[i] = half_edges_.size();
        const auto nbrs = net_.neighbors(i);
        max_deg = std::max(max_deg, nbrs.size());
        for (const auto& nb : nbrs) {
            HalfEdge he;
            const bool lower = i < nb.node;
            he.in = 2 * nb.pair + (lower ? 1u : 0u);
            he.out = 2 * nb.pair + (lower ? 0u : 1u);
            he.alpha = nb.q / rho_;
            he.beta = (1.0 - nb.q) / (1.0 - rho_);
            he.dd = kind_ == BlockModelKind::degree_corrected ? degrees_.d[i] * degrees_.d[nb.node]
                                                              : 1.0;
            half_edges_.push_back(he);
        }
    }
    he_offsets_[n] = half_edges_.size();
    B_.resize(std::max<std::size_t>(1, max_deg) * params_.k);
}

void BpEngine::set_params(BlockParams params) {
    if (params.k != params_.k) throw SizeMismatchError("cannot change k on a live engine");
    params_ = std::move(params);
    refresh_field();
}

void BpEngine::set_messages(const MessageSet& init) {
    if (init.k != params_.k || init.eta.size() != messages_.eta.size())
        throw SizeMismatchError("message set shape mismatch");
    messages_ = init;
    // reset to the uniform state first so the result is a pure function of
    // the messages, independent of previous engine state
    std::fill(node_marg_.begin(), node_marg_.end(), 1.0 / params_.k);
    refresh_field();
    for (std::uint32_t i = 0; i < net_.node_count(); ++i) refresh_node_marginal(i);
    refresh_field();
}

void BpEngine::refresh_field() {
    const std::uint32_t k = params_.k;
    weighted_sum_.assign(k, 0.0);
    const bool dc = kind_ == BlockModelKind::degree_corrected;
    for (std::size_t i = 0; i < net_.node_count(); ++i) {
        const double w = dc ? degrees_.d[i] : 1.0;
        for (std::uint32_t s = 0; s < k; ++s) weighted_sum_[s] += w * node_marg_[i * k + s];
    }
}

void BpEngine::node_factors(std::uint32_t i) {
    const std::uint32_t k = params_.k;
    const double* eta = messages_.eta.data();
    const double* om = params_.omega.data();

    for (std::uint32_t r = 0; r < k; ++r) {
        prod_m_[r] = 1.0;
        prod_e_[r] = 0;
        zero_cnt_[r] = 0;
    }

    double* B = B_.data();
    std::size_t a = 0;
    for (std::size_t e = he_offsets_[i]; e < he_offsets_[i + 1]; ++e, ++a) {
        const HalfEdge& he = half_edges_[e];
        const double* in = eta + static_cast<std::size_t>(he.in) * k;
        double* Ba = B + a * k;
        if (he.dd == 1.0) {
            // B_r = beta + (alpha-beta) * sum_s omega_rs eta_s
            const double d = he.alpha - he.beta;
            for (std::uint32_t r = 0; r < k; ++r) {
                double t = 0.0;
                const double* omr = om + r * k;
                for (std::uint32_t s = 0; s < k; ++s) t += omr[s] * in[s];
                Ba[r] = he.beta + d * t;
            }
        } else {
            for (std::uint32_t r = 0; r < k; ++r) {
                double acc = 0.0;
                const double* omr = om + r * k;
                for (std::uint32_t s = 0; s < k; ++s) {
                    const double w = std::min(he.dd * omr[s], kDcCap);
                    acc += in[s] * (he.alpha * w + he.beta * (1.0 - w));
                }
                Ba[r] = acc;
            }
        }
        for (std::uint32_t r = 0; r < k; ++r) {
            const double b = Ba[r];
            if (b <= 0.0) {
                ++zero_cnt_[r];
                continue;
            }
            double m = prod_m_[r] * b;
            if (m < kMantissaLo) {
                m *= 1e300;
                prod_e_[r] -= 300;
            } else if (m > kMantissaHi) {
                m *= 1e-300;
                prod_e_[r] += 300;
            }
            prod_m_[r] = m;
        }
    }

    // base_r = gamma_r * exp(-(h_r - h_min)) with h_r the external field.
    const bool dc = kind_ == BlockModelKind::degree_corrected;
    const double di = dc ? degrees_.d[i] : 1.0;
    double hmin = std::numeric_limits<double>::infinity();
    for (std::uint32_t r = 0; r < k; ++r) {
        double h = 0.0;
        for (std::uint32_t s = 0; s < k; ++s) h += om[r * k + s] * weighted_sum_[s];
        scratch_[r] = di * h;
        hmin = std::min(hmin, scratch_[r]);
    }
    last_hmin_ = hmin;
    for (std::uint32_t r = 0; r < k; ++r)
        base_[r] = params_.gamma[r] * std::exp(-(scratch_[r] - hmin));
}

void BpEngine::refresh_node_marginal(std::uint32_t i) {
    node_factors(i);
    const std::uint32_t k = params_.k;
    int emax = std::numeric_limits<int>::min();
    for (std::uint32_t r = 0; r < k; ++r)
        if (zero_cnt_[r] == 0 && base_[r] > 0.0) emax = std::max(emax, prod_e_[r]);
    if (emax == std::numeric_limits<int>::min())
        throw NumericalUnderflowError("node marginal normalizer vanished");
    double z = 0.0;
    for (std::uint32_t r = 0; r < k; ++r) {
        double v = 0.0;
        if (zero_cnt_[r] == 0 && base_[r] > 0.0)
            v = base_[r] * prod_m_[r] * pow10_int(prod_e_[r] - emax);
        scratch_[r] = v;
        z += v;
    }
    if (!(z > 0.0)) throw NumericalUnderflowError("node marginal normalizer vanished");
    const bool dc = kind_ == BlockModelKind::degree_corrected;
    const double w = dc ? degrees_.d[i] : 1.0;
    for (std::uint32_t r = 0; r < k; ++r) {
        const double nv = scratch_[r] / z;
        weighted_sum_[r] += w * (nv - node_marg_[i * k + r]);
        node_marg_[i * k + r] = nv;
    }
}

double BpEngine::sweep(double damping) {
    // see class comment: fixed node order, outgoing messages per node, then
    // the node marginal + field update
    const std::uint32_t k = params_.k;
    double max_delta = 0.0;
    std::vector<double> cand(k);

    for (std::uint32_t i = 0; i < net_.node_count(); ++i) {
        if (net_.degree(i) == 0) {
            refresh_node_marginal(i);
            continue;
        }
        node_factors(i);
        // messages to each neighbor: full product divided by that neighbor's factor
        std::size_t a = 0;
        for (std::size_t e = he_offsets_[i]; e < he_offsets_[i + 1]; ++e, ++a) {
            const HalfEdge& he = half_edges_[e];
            const double* Ba = B_.data() + a * k;
            int emax = std::numeric_limits<int>::min();
            for (std::uint32_t r = 0; r < k; ++r) {
                const bool excl_zero = Ba[r] <= 0.0;
                const int zc = zero_cnt_[r] - (excl_zero ? 1 : 0);
                if (zc > 0 || base_[r] <= 0.0) {
                    scratch_[r] = 0.0;
                    continue;
                }
                scratch_[r] = 1.0;  // marks a live entry; value filled below
                emax = std::max(emax, prod_e_[r]);
            }
            if (emax == std::numeric_limits<int>::min())
                throw NumericalUnderflowError("message normalizer vanished (all brackets zero)");
            double z = 0.0;
            for (std::uint32_t r = 0; r < k; ++r) {
                if (scratch_[r] == 0.0) {
                    cand[r] = 0.0;
                    continue;
                }
                double v = base_[r] * prod_m_[r] * pow10_int(prod_e_[r] - emax);
                if (Ba[r] > 0.0) v /= Ba[r];
                cand[r] = v;
                z += v;
            }
            if (!(z > 0.0))
                throw NumericalUnderflowError("message normalizer vanished");
            double* out = messages_.at(he.out);
            for (std::uint32_t r = 0; r < k; ++r) {
                const double nv = damping == 0.0
                                      ? cand[r] / z
                                      : (1.0 - damping) * (cand[r] / z) + damping * out[r];
                const double delta = std::abs(nv - out[r]);
                if (delta > max_delta) max_delta = delta;
                out[r] = nv;
            }
        }
        refresh_node_marginal(i);
    }
    return max_delta;
}

BpRunResult BpEngine::run(const BpOptions& opts) {
    BpRunResult res;
    if (std::isinf(opts.tol)) {
        res.converged = true;
        return res;
    }
    refresh_field();
    double delta = std::numeric_limits<double>::infinity();
    while (res.sweeps < opts.max_sweeps) {
        delta = sweep(opts.damping);
        ++res.sweeps;
        if (delta < opts.tol) {
            res.converged = true;
            break;
        }
    }
    res.final_delta = delta;
    for (std::uint32_t i = 0; i < net_.node_count(); ++i) refresh_node_marginal(i);
    return res;
}

Marginals BpEngine::marginals() const {
    Marginals m;
    m.k = params_.k;
    m.node = node_marg_;
    m.pair = pair_marginals(net_, params_, degrees_, kind_, messages_, rho_);
    return m;
}

double BpEngine::bethe_log_evidence() const {
    const std::uint32_t k = params_.k;
    const std::size_t n = net_.node_count();
    const bool dc = kind_ == BlockModelKind::degree_corrected;
    auto& self = *const_cast<BpEngine*>(this);

    double log_z_nodes = 0.0;
    for (std::uint32_t i = 0; i < n; ++i) {
        self.node_factors(i);
        const double hmin_shift = last_hmin_;
        int emax = std::numeric_limits<int>::min();
        for (std::uint32_t r = 0; r < k; ++r)
            if (zero_cnt_[r] == 0 && base_[r] > 0.0) emax = std::max(emax, prod_e_[r]);
        if (emax == std::numeric_limits<int>::min())
            throw NumericalUnderflowError("node normalizer vanished in bethe evaluation");
        double z = 0.0;
        for (std::uint32_t r = 0; r < k; ++r)
            if (zero_cnt_[r] == 0 && base_[r] > 0.0)
                z += base_[r] * prod_m_[r] * pow10_int(prod_e_[r] - emax);
        log_z_nodes += std::log(z) + emax * std::log(10.0) - hmin_shift;
    }

    double log_z_pairs = 0.0;
    const double* eta = messages_.eta.data();
    for (std::size_t p = 0; p < net_.pair_count(); ++p) {
        const auto& pr = net_.pair(p);
        const double alpha = pr.q / rho_;
        const double beta = (1.0 - pr.q) / (1.0 - rho_);
        const double dd = dc ? degrees_.d[pr.i] * degrees_.d[pr.j] : 1.0;
        const double* ei = eta + (2 * p) * k;
        const double* ej = eta + (2 * p + 1) * k;
        double z = 0.0;
        for (std::uint32_t r = 0; r < k; ++r)
            for (std::uint32_t s = 0; s < k; ++s) {
                const double w = std::min(dd * params_.omega[r * k + s], kDcCap);
                z += ei[r] * ej[s] * (alpha * w + beta * (1.0 - w));
            }
        log_z_pairs += std::log(z);
    }

    // Mean-field correction: the per-node fields double count each non-edge
    // pair, and stored pairs should not be in the field sum at all.
    std::vector<double> wsum(weighted_sum_);
    double corr = 0.0;
    for (std::uint32_t r = 0; r < k; ++r)
        for (std::uint32_t s = 0; s < k; ++s)
            corr += 0.5 * wsum[r] * params_.omega[r * k + s] * wsum[s];
    for (std::size_t i = 0; i < n; ++i) {
        const double w = dc ? degrees_.d[i] : 1.0;
        for (std::uint32_t r = 0; r < k; ++r)
            for (std::uint32_t s = 0; s < k; ++s)
                corr -= 0.5 * w * w * node_marg_[i * k + r] * params_.omega[r * k + s] *
                        node_marg_[i * k + s];
    }
    for (std::size_t p = 0; p < net_.pair_count(); ++p) {
        const auto& pr = net_.pair(p);
        const double dd = dc ? degrees_.d[pr.i] * degrees_.d[pr.j] : 1.0;
        for (std::uint32_t r = 0; r < k; ++r)
            for (std::uint32_t s = 0; s < k; ++s)
                corr -= dd * node_marg_[pr.i * k + r] * params_.omega[r * k + s] *
                        node_marg_[pr.j * k + s];
    }

    const double zero_pairs =
        static_cast<double>(net_.total_pair_count()) - static_cast<double>(net_.pair_count());
    return log_z_nodes - log_z_pairs + corr + zero_pairs * std::log1p(-rho_);
}

double bp_sweep(const UncertainNetwork& net, const BlockParams& params,
                const DegreeVector& degrees, BlockModelKind kind, MessageSet& messages,
                double rho, double damping) {
    BpEngine engine(net, params, kind, degrees, rho);
    engine.set_messages(messages);
    const double delta = engine.sweep(damping);
    messages = engine.messages();
    return delta;
}

BpRunOutput bp_run(const UncertainNetwork& net, const BlockParams& params,
                   const DegreeVector& degrees, BlockModelKind kind, const MessageSet& init,
                   double tol, int max_sweeps, double rho, double damping) {
    BpEngine engine(net, params, kind, degrees, rho);
    engine.set_messages(init);
    BpOptions opts;
    opts.tol = tol;
    opts.max_sweeps = max_sweeps;
    opts.damping = damping;
    const BpRunResult r = engine.run(opts);
    BpRunOutput out;
    out.messages = engine.messages();
    out.marginals = engine.marginals();
    out.converged = r.converged;
    out.sweeps = r.sweeps;
    return out;
}

std::vector<double> pair_marginals(const UncertainNetwork& net, const BlockParams& params,
                                   const DegreeVector& degrees, BlockModelKind kind,
                                   const MessageSet& messages, double rho) {
    const std::uint32_t k = params.k;
    const bool dc = kind == BlockModelKind::degree_corrected;
    std::vector<double> tables(net.pair_count() * k * k);
    for (std::size_t p = 0; p < net.pair_count(); ++p) {
        const auto& pr = net.pair(p);
        const double alpha = pr.q / rho;
        const double beta = (1.0 - pr.q) / (1.0 - rho);
        const double dd = dc ? degrees.d[pr.i] * degrees.d[pr.j] : 1.0;
        const double* ei = messages.at(2 * p);
        const double* ej = messages.at(2 * p + 1);
        double* tab = tables.data() + p * k * k;
        double z = 0.0;
        for (std::uint32_t r = 0; r < k; ++r)
            for (std::uint32_t s = 0; s < k; ++s) {
                const double w = std::min(dd * params.omega[r * k + s], kDcCap);
                const double v = ei[r] * ej[s] * (alpha * w + beta * (1.0 - w));
                tab[r * k + s] = v;
                z += v;
            }
        if (!(z > 0.0)) throw NumericalUnderflowError("pair marginal normalizer vanished");
        for (std::uint32_t t = 0; t < k * k; ++t) tab[t] /= z;
    }
    return tables;
}

MessageSet messages_from_prior(const UncertainNetwork& net, const BlockParams& params) {
    MessageSet m;
    m.k = params.k;
    m.eta.resize(2 * net.pair_count() * params.k);
    for (std::size_t d = 0; d < 2 * net.pair_count(); ++d)
        for (std::uint32_t r = 0; r < params.k; ++r) m.eta[d * params.k + r] = params.gamma[r];
    return m;
}

} // namespace uncnet
