#pragma once
// Channel enhancement at a KKT point: the enhanced noise covariance, its four structural
// properties, the converse identities that rewrite R1 and R2 through it, and a checker for
// the extremal inequality restricted to Gaussian inputs with a deterministic auxiliary.
//
// All formulas are written for encoding order 12. Order-21 points are handled in the
// frame where the users are exchanged (see run_converse_pipeline).

#include "mimobc/channel.hpp"
#include "mimobc/kkt.hpp"
#include "mimobc/optimizer.hpp"
#include "mimobc/rates.hpp"

#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace mimobc {

struct PropertyCheck {
    std::string name;
    double residual = 0.0;  // relative Frobenius (absolute when the left side is zero)
    double absolute = 0.0;
    bool passed = false;
};

struct EnhancementReport {
    std::vector<PropertyCheck> checks;
    double loewner_margin_1 = 0.0;  // min eigenvalue of Sigma_1 - Sigma~
    double loewner_margin_2 = 0.0;

    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
    std::vector<std::string> failing() const {
        std::vector<std::string> out;
        for (const auto& c : checks)
            if (!c.passed) out.push_back(c.name);
        return out;
    }
    const PropertyCheck& get(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return c;
        throw std::out_of_range("no property named " + name);
    }
};

struct EnhancementOptions {
    double property_tol = 1e-6;
    double loewner_tol = 1e-8;
};

/// Sigma~ = mu (mu (K2 + Sigma_2)^{-1} + M2)^{-1} - K2.
inline Matrix build_enhanced_noise(const ChannelModel& model, const Matrix& k2_star,
                                   const Matrix& m2, double mu_sum) {
    if (!model.aligned)
        throw UnsupportedConfiguration("channel enhancement requires an aligned channel");
    if (!(mu_sum > 0.0)) throw DegenerateWeights("channel enhancement requires mu1 + mu2 > 0");
    if (!is_psd(k2_star)) throw ConstraintError("K2* not positive semi-definite");
    if (!is_psd(m2)) throw ConstraintError("M2 not positive semi-definite");
    const Matrix inner = mu_sum * inverse_pd(k2_star + model.user2.Sigma) + m2;
    const Matrix st = symmetrize(mu_sum * inverse_pd(inner) - k2_star);
    if (min_eigenvalue(st) <= default_tolerances().pd_floor)
        throw NotPositiveDefinite("enhanced noise covariance is not positive-definite "
                                  "(inconsistent multipliers)");
    return st;
}

namespace detail {

inline PropertyCheck compare(std::string name, const Matrix& lhs, const Matrix& rhs, double tol) {
    PropertyCheck c;
    c.name = std::move(name);
    c.absolute = (lhs - rhs).norm();
    const double scale = lhs.norm();
    c.residual = scale > 0.0 ? c.absolute / scale : c.absolute;
    c.passed = c.residual <= tol;
    return c;
}

}  // namespace detail

inline EnhancementReport check_enhancement_properties(const ChannelModel& model,
                                                      const CovariancePair& pair,
                                                      const KKTCertificate& cert,
                                                      const Matrix& sigma_tilde, double mu_sum,
                                                      const EnhancementOptions& opts = {}) {
    const Matrix& s1 = model.user1.Sigma;
    const Matrix& s2 = model.user2.Sigma;
    const Matrix k = pair.K1 + pair.K2;
    const Matrix& k2 = pair.K2;
    EnhancementReport rep;

    rep.loewner_margin_1 = min_eigenvalue(s1 - sigma_tilde);
    rep.loewner_margin_2 = min_eigenvalue(s2 - sigma_tilde);
    PropertyCheck dom;
    dom.name = "(i) Sigma~ <= Sigma_1, Sigma~ <= Sigma_2";
    dom.absolute = std::max(0.0, -std::min(rep.loewner_margin_1, rep.loewner_margin_2));
    dom.residual = dom.absolute;
    dom.passed = dom.absolute <= opts.loewner_tol;
    rep.checks.push_back(dom);

    rep.checks.push_back(detail::compare("(ii) mu (K + Sigma~)^-1 = mu (K + Sigma_1)^-1 + M1",
                                         mu_sum * inverse_pd(k + sigma_tilde),
                                         mu_sum * inverse_pd(k + s1) + cert.M1, opts.property_tol));
    rep.checks.push_back(detail::compare("(iii) (K2 + Sigma~)^-1 Sigma~ = (K2 + Sigma_2)^-1 Sigma_2",
                                         inverse_pd(k2 + sigma_tilde) * sigma_tilde,
                                         inverse_pd(k2 + s2) * s2, opts.property_tol));
    rep.checks.push_back(detail::compare(
        "(iv) (K + Sigma~)^-1 (K2 + Sigma~) = (K + Sigma_1)^-1 (K2 + Sigma_1)",
        inverse_pd(k + sigma_tilde) * (k2 + sigma_tilde), inverse_pd(k + s1) * (k2 + s1),
        opts.property_tol));
    return rep;
}

struct IdentityReport {
    double r1_formula = 0.0;   // bits
    double r1_enhanced = 0.0;
    double r2_formula = 0.0;
    double r2_enhanced = 0.0;
    double gap1() const { return std::abs(r1_formula - r1_enhanced); }
    double gap2() const { return std::abs(r2_formula - r2_enhanced); }
    double max_gap() const { return std::max(gap1(), gap2()); }
    bool passed(double tol = 1e-8) const { return max_gap() <= tol; }
};

/// R1 = 1/2 log |(K + Sigma~) Sigma_2| / |(K + Sigma_2) Sigma~|,
/// R2 = 1/2 log |(K + Sigma~) Sigma_1| / |(K + Sigma_1) Sigma~|.
inline IdentityReport check_converse_identities(const ChannelModel& model,
                                                const CovariancePair& pair,
                                                const Matrix& sigma_tilde) {
    if (!model.aligned)
        throw UnsupportedConfiguration("converse identities require an aligned channel");
    const Matrix& s1 = model.user1.Sigma;
    const Matrix& s2 = model.user2.Sigma;
    const Matrix k = pair.K1 + pair.K2;
    const auto t = sdpc_rate_triple(model, pair, Order::O12);
    const double ld_kt = logdet_pd(k + sigma_tilde);
    const double ld_t = logdet_pd(sigma_tilde);
    IdentityReport rep;
    rep.r1_formula = t.r1_raw;
    rep.r2_formula = t.r2_raw;
    rep.r1_enhanced = logdet_to_bits(ld_kt + logdet_pd(s2) - logdet_pd(k + s2) - ld_t);
    rep.r2_enhanced = logdet_to_bits(ld_kt + logdet_pd(s1) - logdet_pd(k + s1) - ld_t);
    return rep;
}

struct ClosureReport {
    double formula = 0.0;    // min(R01, R02) + mu1 R1 + mu2 R2, signed rates, bits
    double assembled = 0.0;  // entropy form through Sigma~, bits
    double gap() const { return std::abs(formula - assembled); }
};

/// The upper bound of the converse assembled from Gaussian entropies,
///   lambda h(S + Sigma_1) + (1 - lambda) h(S + Sigma_2) + mu h(K + Sigma~)
///   - (lambda + mu2) h(K + Sigma_1) - (1 - lambda + mu1) h(K + Sigma_2)
///   - mu1/2 log |Sigma~|/|Sigma_2| - mu2/2 log |Sigma~|/|Sigma_1|,
/// with h(A) = 1/2 log |2 pi e A|, compared with the weighted rate formula.
inline ClosureReport weighted_sum_closure(const ChannelModel& model, const CovariancePair& pair,
                                          const Weights& weights, const KKTCertificate& cert,
                                          const Matrix& sigma_tilde) {
    const Matrix& s1 = model.user1.Sigma;
    const Matrix& s2 = model.user2.Sigma;
    const Matrix k = pair.K1 + pair.K2;
    const double c = model.t * std::log(2.0 * std::numbers::pi * std::numbers::e);
    auto h = [c](const Matrix& a) { return 0.5 * (c + logdet_pd(a)); };
    const double lam = cert.lambda;
    const double mu1 = weights.mu1, mu2 = weights.mu2, mu = weights.sum();
    const double nats = lam * h(model.S + s1) + (1.0 - lam) * h(model.S + s2) +
                        mu * h(k + sigma_tilde) - (lam + mu2) * h(k + s1) -
                        (1.0 - lam + mu1) * h(k + s2) -
                        0.5 * mu1 * (logdet_pd(sigma_tilde) - logdet_pd(s2)) -
                        0.5 * mu2 * (logdet_pd(sigma_tilde) - logdet_pd(s1));
    ClosureReport rep;
    rep.assembled = nats / std::numbers::ln2;
    rep.formula = weighted_value_raw(sdpc_rate_triple(model, pair, Order::O12), weights);
    return rep;
}

// ---------------------------------------------------------------------------
// Extremal inequality, Gaussian-restricted.

struct ExtremalInstance {
    double beta = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    Matrix K_star;
    Matrix MS;
};

/// beta = mu1 + mu2, gamma1 = lambda + mu2, gamma2 = 1 - lambda + mu1, K* = K1* + K2*.
inline ExtremalInstance make_extremal_instance(const CovariancePair& pair, const Weights& weights,
                                               const KKTCertificate& cert) {
    return {weights.sum(), cert.lambda + weights.mu2, cert.lambda_bar() + weights.mu1,
            pair.K1 + pair.K2, cert.MS};
}

/// | beta (K* + Sigma~)^-1 - sum_j gamma_j (K* + Sigma_j)^-1 - MS |_F
inline double extremal_stationarity_residual(const ExtremalInstance& inst,
                                             const ChannelModel& model,
                                             const Matrix& sigma_tilde) {
    const Matrix lhs = inst.beta * inverse_pd(inst.K_star + sigma_tilde);
    const Matrix rhs = inst.gamma1 * inverse_pd(inst.K_star + model.user1.Sigma) +
                       inst.gamma2 * inverse_pd(inst.K_star + model.user2.Sigma) + inst.MS;
    return (lhs - rhs).norm();
}

namespace detail {

inline double extremal_value(const ExtremalInstance& inst, const ChannelModel& model,
                             const Matrix& sigma_tilde, const Matrix& k) {
    const double c = model.t * std::log(2.0 * std::numbers::pi * std::numbers::e);
    auto h = [c](const Matrix& a) { return 0.5 * (c + logdet_pd(a)); };
    return inst.beta * h(k + sigma_tilde) - inst.gamma1 * h(k + model.user1.Sigma) -
           inst.gamma2 * h(k + model.user2.Sigma);
}

}  // namespace detail

struct ExtremalOptions {
    double stationarity_tol = 1e-6;
    double dominance_tol = 1e-8;
};

/// RHS - LHS of the extremal inequality for Gaussian X ~ N(0, K_candidate) and a
/// deterministic auxiliary, in bits. Non-negative whenever the inequality applies.
inline double extremal_gap(const ExtremalInstance& inst, const ChannelModel& model,
                           const Matrix& sigma_tilde, const Matrix& k_candidate,
                           const ExtremalOptions& opts = {}) {
    if (!s_strictly_pd(model))
        throw InvalidInstance("extremal inequality requires S strictly positive-definite");
    if (inst.beta < 0.0 || inst.gamma1 < 0.0 || inst.gamma2 < 0.0)
        throw InvalidInstance("extremal weights must be non-negative");
    if (!loewner_leq(sigma_tilde, model.user1.Sigma, opts.dominance_tol) ||
        !loewner_leq(sigma_tilde, model.user2.Sigma, opts.dominance_tol))
        throw InvalidInstance("extremal inequality requires Sigma~ <= Sigma_j");
    if (!is_psd(inst.K_star) || !loewner_leq(inst.K_star, model.S))
        throw InvalidInstance("K* must satisfy 0 <= K* <= S");
    const double res = extremal_stationarity_residual(inst, model, sigma_tilde);
    if (res > opts.stationarity_tol)
        throw InvalidInstance("extremal instance stationarity residual " + std::to_string(res) +
                              " exceeds tolerance");
    if (!is_psd(k_candidate) || !loewner_leq(k_candidate, model.S))
        throw ConstraintError("candidate covariance must satisfy 0 <= K <= S");
    const double v_star = detail::extremal_value(inst, model, sigma_tilde, inst.K_star);
    const double v = detail::extremal_value(inst, model, sigma_tilde, k_candidate);
    return (v_star - v) / std::numbers::ln2;
}

/// Random covariance 0 <= K <= S: K = S^{1/2} Q diag(u) Q^T S^{1/2}, u in [0, 1].
inline Matrix random_candidate(const Matrix& s_half, std::mt19937_64& rng) {
    const int t = static_cast<int>(s_half.rows());
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    std::bernoulli_distribution edge(0.2);
    const Matrix q = detail::random_orthogonal(t, rng);
    Vector u(t);
    for (int i = 0; i < t; ++i) {
        u(i) = ud(rng);
        if (edge(rng)) u(i) = ud(rng) < 0.5 ? 0.0 : 1.0;
    }
    return symmetrize(s_half * q * u.asDiagonal() * q.transpose() * s_half);
}

struct ExtremalSweep {
    double min_gap = std::numeric_limits<double>::infinity();
    double gap_at_kstar = 0.0;
    int candidates = 0;
};

/// Evaluates the gap at K* and at `n` random candidates; candidate i uses its own
/// stream derived from (seed, i).
inline ExtremalSweep extremal_sweep(const ExtremalInstance& inst, const ChannelModel& model,
                                    const Matrix& sigma_tilde, int n, std::uint64_t seed,
                                    const ExtremalOptions& opts = {}) {
    ExtremalSweep out;
    out.gap_at_kstar = extremal_gap(inst, model, sigma_tilde, inst.K_star, opts);
    const Matrix s_half = sqrt_psd(model.S);
    for (int i = 0; i < n; ++i) {
        std::seed_seq sseq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                           static_cast<std::uint32_t>(i), 0xe7u};
        std::mt19937_64 rng(sseq);
        Matrix k = random_candidate(s_half, rng);
        // Guard the Loewner check against rounding in the congruence.
        k = symmetrize(k * (1.0 - 1e-12));
        out.min_gap = std::min(out.min_gap, extremal_gap(inst, model, sigma_tilde, k, opts));
        ++out.candidates;
    }
    return out;
}

// ---------------------------------------------------------------------------

struct EnhancedInstance {
    Matrix sigma_tilde;
    ChannelModel model;  // in the order-12 frame
    CovariancePair pair;
    KKTCertificate certificate;
    Weights weights;
    EnhancementReport property_report;
};

/// The full converse chain at one optimizer output: KKT recovery, enhanced noise,
/// property checks, converse identities, closure and the extremal instance.
/// For an order-21 output every object lives in the frame with the users exchanged.
struct ConversePipeline {
    KKTCertificate certificate;  // in the original frame
    EnhancedInstance enhanced;
    IdentityReport identities;
    ClosureReport closure;
    ExtremalInstance extremal;
};

inline ConversePipeline run_converse_pipeline(const ChannelModel& model, const OptResult& res,
                                              const KKTOptions& kopts = {},
                                              const EnhancementOptions& eopts = {}) {
    ConversePipeline out;
    out.certificate = recover_kkt_sdpc(model, res.pair, res.weights, res.triple, kopts);
    const bool o12 = res.triple.order == Order::O12;
    auto& e = out.enhanced;
    e.model = o12 ? model : swap_users(model);
    e.pair = o12 ? res.pair : res.pair.swapped();
    e.weights = o12 ? res.weights : res.weights.swapped();
    e.certificate = out.certificate;
    if (!o12) {
        std::swap(e.certificate.M1, e.certificate.M2);
        e.certificate.lambda = 1.0 - e.certificate.lambda;
        e.certificate.order = Order::O12;
    }
    const double mu = e.weights.sum();
    e.sigma_tilde = build_enhanced_noise(e.model, e.pair.K2, e.certificate.M2, mu);
    e.property_report =
        check_enhancement_properties(e.model, e.pair, e.certificate, e.sigma_tilde, mu, eopts);
    out.identities = check_converse_identities(e.model, e.pair, e.sigma_tilde);
    out.closure = weighted_sum_closure(e.model, e.pair, e.weights, e.certificate, e.sigma_tilde);
    out.extremal = make_extremal_instance(e.pair, e.weights, e.certificate);
    return out;
}

}  // namespace mimobc
