#pragma once
// Boundary tracing through support functions, the encoding-order invariance check and the
// correspondence between the S-DPC optimum and the non-secret (NS-DPC) sum-rate problem.

#include "mimobc/kkt.hpp"
#include "mimobc/optimizer.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace mimobc {

struct RegionSample {
    Weights weights;
    Scheme scheme = Scheme::SDPC;
    Order order = Order::O12;
    RateTriple triple;
    CovariancePair pair;
    double objective = 0.0;  // support value, bits
    std::uint64_t seed = 0;
};

struct RegionOptions {
    OptOptions opt;
    double gap_tol = 1e-4;     // bits
    int escalation = 4;        // restart multiplier on a failed comparison
    double kkt_tol = 1e-5;
};

/// {0} together with n - 1 log-spaced values on [2^-4, 2^2].
inline std::vector<double> default_weight_axis(int n = 7) {
    if (n < 1) throw std::invalid_argument("weight axis needs at least one point");
    std::vector<double> v{0.0};
    for (int i = 0; i + 1 < n; ++i)
        v.push_back(n == 2 ? 1.0 : std::pow(2.0, -4.0 + 6.0 * i / (n - 2)));
    return v;
}

/// Cartesian product of an axis with itself; mu1 varies slowest.
inline std::vector<Weights> weight_grid(const std::vector<double>& axis) {
    std::vector<Weights> g;
    for (double a : axis)
        for (double b : axis) g.push_back({a, b});
    return g;
}

inline std::vector<Weights> default_weight_grid(int n = 7) {
    return weight_grid(default_weight_axis(n));
}

inline void require_grid(const std::vector<Weights>& grid) {
    for (const auto& w : grid) require_weights(w);
}

inline RegionSample make_sample(const OptResult& r, Scheme scheme, Order order) {
    return {r.weights, scheme, order, r.triple, r.pair, r.objective, r.seed};
}

/// One support-function sample per grid point, in grid order.
inline std::vector<RegionSample> trace_boundary(const ChannelModel& model, Scheme scheme,
                                                Order order, const std::vector<Weights>& grid,
                                                const RegionOptions& opts = {}) {
    require_grid(grid);
    std::vector<RegionSample> out;
    out.reserve(grid.size());
    for (const auto& w : grid)
        out.push_back(make_sample(maximize_weighted(model, w, scheme, order, opts.opt), scheme, order));
    return out;
}

struct InvarianceEntry {
    Weights weights;
    double support12 = 0.0;
    double support21 = 0.0;
    double gap = 0.0;
    bool escalated = false;
};

struct InvarianceReport {
    std::string grid;
    Scheme scheme = Scheme::SDPC;
    std::vector<InvarianceEntry> entries;
    double max_gap = 0.0;
    double tol = 1e-4;
    bool passed() const { return max_gap <= tol; }
};

namespace detail {

// Support values of both orders at one weight, retrying with more restarts when they
// disagree; the larger value of each order over all attempts is kept.
inline InvarianceEntry compare_orders(const ChannelModel& model, Scheme scheme, const Weights& w,
                                      double scale, const RegionOptions& opts) {
    InvarianceEntry e;
    e.weights = w;
    e.support12 = scale * maximize_weighted(model, w, scheme, Order::O12, opts.opt).objective;
    e.support21 = scale * maximize_weighted(model, w, scheme, Order::O21, opts.opt).objective;
    e.gap = std::abs(e.support12 - e.support21);
    if (e.gap > opts.gap_tol && opts.escalation > 1) {
        OptOptions more = opts.opt;
        more.restarts = std::max(1, opts.opt.restarts) * opts.escalation;
        more.polish_candidates = opts.opt.polish_candidates * opts.escalation;
        e.escalated = true;
        e.support12 = std::max(
            e.support12, scale * maximize_weighted(model, w, scheme, Order::O12, more).objective);
        e.support21 = std::max(
            e.support21, scale * maximize_weighted(model, w, scheme, Order::O21, more).objective);
        e.gap = std::abs(e.support12 - e.support21);
    }
    return e;
}

}  // namespace detail

/// |sigma_12(mu) - sigma_21(mu)| over the grid.
inline InvarianceReport support_gap(const ChannelModel& model, const std::vector<Weights>& grid,
                                    const RegionOptions& opts = {}, Scheme scheme = Scheme::SDPC) {
    require_grid(grid);
    InvarianceReport rep;
    rep.scheme = scheme;
    rep.tol = opts.gap_tol;
    rep.grid = std::to_string(grid.size()) + " weight pairs";
    for (const auto& w : grid) {
        rep.entries.push_back(detail::compare_orders(model, scheme, w, 1.0, opts));
        rep.max_gap = std::max(rep.max_gap, rep.entries.back().gap);
    }
    return rep;
}

struct NSCorrespondenceReport {
    Weights weights;
    double mu0_prime = 0.0;
    double mu_prime = 0.0;
    double sdpc_objective = 0.0;
    bool kkt_skipped = false;
    double kkt_residual = 0.0;  // max of stationarity and slackness residuals
    double gamma = 0.0;
    bool kkt_ok = false;
    double ns_support12 = 0.0;  // mu0' R0 + mu' (R1 + R2), bits
    double ns_support21 = 0.0;
    double ns_gap = 0.0;
    bool gap_ok = false;
    bool passed() const { return (kkt_skipped || kkt_ok) && gap_ok; }
};

/// (a) S-DPC optimum at (mu1, mu2); (b) NS KKT residuals there with mu0' = 1 + mu1 + mu2,
/// mu' = mu1 + mu2; (c) NS support of mu0' R0 + mu' (R1 + R2) under both orders.
inline NSCorrespondenceReport ns_correspondence_check(const ChannelModel& model,
                                                      const Weights& weights,
                                                      const RegionOptions& opts = {},
                                                      const KKTOptions& kopts = {}) {
    require_weights(weights);
    if (!model.aligned)
        throw UnsupportedConfiguration("NS correspondence requires an aligned channel");
    detail::require_strict_s(model);
    NSCorrespondenceReport rep;
    rep.weights = weights;
    rep.mu0_prime = 1.0 + weights.sum();
    rep.mu_prime = weights.sum();

    const auto sd = maximize_weighted(model, weights, Scheme::SDPC, Order::O12, opts.opt);
    rep.sdpc_objective = sd.objective;
    if (rep.mu_prime > 0.0) {
        const auto cert = recover_kkt_ns(model, sd.pair, rep.mu0_prime, rep.mu_prime, kopts);
        rep.kkt_residual = std::max(cert.residual_stationarity, cert.residual_slackness);
        rep.gamma = cert.lambda;
        rep.kkt_ok = rep.kkt_residual <= opts.kkt_tol && cert.multipliers_psd(kopts.psd_tol) &&
                     cert.lambda_rule_ok;
    } else {
        rep.kkt_skipped = true;
    }

    const double r = rep.mu_prime / rep.mu0_prime;
    const auto e = detail::compare_orders(model, Scheme::NSDPC, {r, r}, rep.mu0_prime, opts);
    rep.ns_support12 = e.support12;
    rep.ns_support21 = e.support21;
    rep.ns_gap = e.gap;
    rep.gap_ok = rep.ns_gap <= opts.gap_tol;
    return rep;
}

}  // namespace mimobc
