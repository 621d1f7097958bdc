#pragma once
// Closed-form rate expressions for secret DPC (S-DPC) and non-secret DPC (NS-DPC).
// Reported rates are in bits per channel use.

#include "mimobc/channel.hpp"
#include "mimobc/logdet.hpp"

#include <algorithm>
#include <numbers>
#include <string>

namespace mimobc {

enum class Scheme { SDPC, NSDPC };
enum class Order { O12, O21 };

inline std::string to_string(Scheme s) { return s == Scheme::SDPC ? "sdpc" : "nsdpc"; }
inline std::string to_string(Order o) { return o == Order::O12 ? "12" : "21"; }

inline Scheme parse_scheme(const std::string& s) {
    if (s == "sdpc") return Scheme::SDPC;
    if (s == "nsdpc") return Scheme::NSDPC;
    throw std::invalid_argument("unknown scheme '" + s + "' (expected sdpc|nsdpc)");
}
inline Order parse_order(const std::string& s) {
    if (s == "12") return Order::O12;
    if (s == "21") return Order::O21;
    throw std::invalid_argument("unknown order '" + s + "' (expected 12|21)");
}
inline Order other(Order o) { return o == Order::O12 ? Order::O21 : Order::O12; }

/// Converts a log-det difference (natural log, no 1/2 factor) to bits.
inline constexpr double kBitsPerLogdet = 0.5 / std::numbers::ln2;
inline double logdet_to_bits(double v) { return v * kBitsPerLogdet; }
inline double bits_to_logdet(double b) { return b / kBitsPerLogdet; }

struct RateTriple {
    double r01 = 0.0;
    double r02 = 0.0;
    double r1_raw = 0.0;
    double r2_raw = 0.0;
    double r0 = 0.0;
    double r1 = 0.0;
    double r2 = 0.0;
    Scheme scheme = Scheme::SDPC;
    Order order = Order::O12;
};

namespace detail {

inline RateTriple finish(RateTriple t) {
    t.r0 = std::min(t.r01, t.r02);
    t.r1 = std::max(0.0, t.r1_raw);
    t.r2 = std::max(0.0, t.r2_raw);
    return t;
}

inline double ld_user(const UserChannel& u, const Matrix& k) {
    return logdet_pd(u.H * k * u.H.transpose() + u.Sigma);
}

// Order 12: user 2's confidential covariance K2 is the inner layer.
inline RateTriple sdpc12(const ChannelModel& m, const CovariancePair& p) {
    const Matrix k = p.K1 + p.K2;
    const Matrix zero = Matrix::Zero(m.t, m.t);
    const auto& u1 = m.user1;
    const auto& u2 = m.user2;
    RateTriple t;
    t.r01 = logdet_to_bits(ld_user(u1, m.S) - ld_user(u1, k));
    t.r02 = logdet_to_bits(ld_user(u2, m.S) - ld_user(u2, k));
    t.r1_raw = logdet_to_bits((ld_user(u1, k) - ld_user(u1, p.K2)) -
                              (ld_user(u2, k) - ld_user(u2, p.K2)));
    t.r2_raw = logdet_to_bits((ld_user(u2, p.K2) - ld_user(u2, zero)) -
                              (ld_user(u1, p.K2) - ld_user(u1, zero)));
    return t;
}

inline RateTriple nsdpc12(const ChannelModel& m, const CovariancePair& p) {
    const Matrix k = p.K1 + p.K2;
    const Matrix& s1 = m.user1.Sigma;
    const Matrix& s2 = m.user2.Sigma;
    RateTriple t;
    t.r01 = logdet_to_bits(logdet_pd(m.S + s1) - logdet_pd(k + s1));
    t.r02 = logdet_to_bits(logdet_pd(m.S + s2) - logdet_pd(k + s2));
    t.r1_raw = logdet_to_bits(logdet_pd(k + s1) - logdet_pd(p.K2 + s1));
    t.r2_raw = logdet_to_bits(logdet_pd(p.K2 + s2) - logdet_pd(s2));
    return t;
}

inline RateTriple swap_user_indices(RateTriple t) {
    std::swap(t.r01, t.r02);
    std::swap(t.r1_raw, t.r2_raw);
    return t;
}

inline void require_aligned(const ChannelModel& m, const char* what) {
    if (!m.aligned)
        throw UnsupportedConfiguration(std::string(what) + " requires an aligned channel (H1 = H2 = I)");
}

}  // namespace detail

inline RateTriple sdpc_rate_triple(const ChannelModel& model, const CovariancePair& pair,
                                   Order order) {
    require_feasible(model, pair);
    RateTriple t = order == Order::O12
                       ? detail::sdpc12(model, pair)
                       : detail::swap_user_indices(detail::sdpc12(swap_users(model), pair.swapped()));
    t.scheme = Scheme::SDPC;
    t.order = order;
    return detail::finish(t);
}

inline RateTriple nsdpc_rate_triple(const ChannelModel& model, const CovariancePair& pair,
                                    Order order) {
    detail::require_aligned(model, "NS-DPC rates");
    require_feasible(model, pair);
    RateTriple t = order == Order::O12
                       ? detail::nsdpc12(model, pair)
                       : detail::swap_user_indices(detail::nsdpc12(swap_users(model), pair.swapped()));
    t.scheme = Scheme::NSDPC;
    t.order = order;
    return detail::finish(t);
}

inline RateTriple rate_triple(const ChannelModel& model, const CovariancePair& pair, Scheme scheme,
                              Order order) {
    return scheme == Scheme::SDPC ? sdpc_rate_triple(model, pair, order)
                                  : nsdpc_rate_triple(model, pair, order);
}

/// min(r01, r02) + mu1 r1 + mu2 r2 on clamped rates.
inline double weighted_value(const RateTriple& t, const Weights& w) {
    return t.r0 + w.mu1 * t.r1 + w.mu2 * t.r2;
}

/// Same combination with the signed confidential rates.
inline double weighted_value_raw(const RateTriple& t, const Weights& w) {
    return t.r0 + w.mu1 * t.r1_raw + w.mu2 * t.r2_raw;
}

inline double weighted_objective(const ChannelModel& model, const CovariancePair& pair,
                                 const Weights& weights, Scheme scheme, Order order) {
    require_weights(weights);
    return weighted_value(rate_triple(model, pair, scheme, order), weights);
}

// ---------------------------------------------------------------------------
// The same formulas as log-det expressions over (K1, K2), in log-det units
// (natural log, no 1/2 factor). Consumed by the optimizer.

struct RateExpressions {
    LogDetExpr r01, r02, r1, r2;
};

namespace detail {

inline void add_user(LogDetExpr& e, double coeff, const UserChannel& u, double a1, double a2) {
    e.add(coeff, u.Sigma, u.H, a1, a2);
}

inline RateExpressions sdpc12_exprs(const ChannelModel& m) {
    RateExpressions x;
    const auto& u1 = m.user1;
    const auto& u2 = m.user2;
    x.r01.add_constant_logdet(1.0, u1.H * m.S * u1.H.transpose() + u1.Sigma);
    add_user(x.r01, -1.0, u1, 1.0, 1.0);
    x.r02.add_constant_logdet(1.0, u2.H * m.S * u2.H.transpose() + u2.Sigma);
    add_user(x.r02, -1.0, u2, 1.0, 1.0);
    add_user(x.r1, 1.0, u1, 1.0, 1.0);
    add_user(x.r1, -1.0, u1, 0.0, 1.0);
    add_user(x.r1, -1.0, u2, 1.0, 1.0);
    add_user(x.r1, 1.0, u2, 0.0, 1.0);
    add_user(x.r2, 1.0, u2, 0.0, 1.0);
    x.r2.add_constant_logdet(-1.0, u2.Sigma);
    add_user(x.r2, -1.0, u1, 0.0, 1.0);
    x.r2.add_constant_logdet(1.0, u1.Sigma);
    return x;
}

inline RateExpressions nsdpc12_exprs(const ChannelModel& m) {
    RateExpressions x;
    const auto& u1 = m.user1;
    const auto& u2 = m.user2;
    x.r01.add_constant_logdet(1.0, m.S + u1.Sigma);
    add_user(x.r01, -1.0, u1, 1.0, 1.0);
    x.r02.add_constant_logdet(1.0, m.S + u2.Sigma);
    add_user(x.r02, -1.0, u2, 1.0, 1.0);
    add_user(x.r1, 1.0, u1, 1.0, 1.0);
    add_user(x.r1, -1.0, u1, 0.0, 1.0);
    add_user(x.r2, 1.0, u2, 0.0, 1.0);
    x.r2.add_constant_logdet(-1.0, u2.Sigma);
    return x;
}

inline void swap_variables(LogDetExpr& e) {
    for (auto& term : e.terms) std::swap(term.a1, term.a2);
}

}  // namespace detail

inline RateExpressions rate_expressions(const ChannelModel& model, Scheme scheme, Order order) {
    if (scheme == Scheme::NSDPC) detail::require_aligned(model, "NS-DPC rates");
    auto build = [scheme](const ChannelModel& m) {
        return scheme == Scheme::SDPC ? detail::sdpc12_exprs(m) : detail::nsdpc12_exprs(m);
    };
    if (order == Order::O12) return build(model);
    RateExpressions x = build(swap_users(model));
    for (auto* e : {&x.r01, &x.r02, &x.r1, &x.r2}) detail::swap_variables(*e);
    std::swap(x.r01, x.r02);
    std::swap(x.r1, x.r2);
    return x;
}

}  // namespace mimobc
