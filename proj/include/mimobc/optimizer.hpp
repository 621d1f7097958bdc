#pragma once
// Weighted-sum-rate maximization over covariance pairs.
//
// The two covariances are optimized jointly with an epigraph variable r for the common
// rate (r <= R01, r <= R02), so the min() never has to be differentiated. Feasibility is
// kept by log-barriers on K1, K2, S - K1 - K2 and R0j - r, and each barrier subproblem is
// solved by a Newton method whose Hessian eigenvalues are replaced by their absolute values
// (the problem is not concave). A batch of starts is followed to a moderate barrier
// parameter; the best few are then followed to the end of the path.

#include "mimobc/channel.hpp"
#include "mimobc/logdet.hpp"
#include "mimobc/rates.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>

namespace mimobc {

struct OptOptions {
    int restarts = 16;          // random starts, in addition to the 3 structured ones
    int max_iters = 100;        // Newton iterations per barrier subproblem
    double step = 10.0;         // barrier parameter growth per outer stage
    double tol = 1e-12;         // final barrier gap, log-det units
    std::uint64_t seed = 0;
    double initial_tau = 10.0;
    double explore_tau = 1e4;   // pruning point of the multi-start
    int polish_candidates = 3;  // starts followed to the end of the path
    double snap = 1e-7;         // eigenvalues below this are set exactly onto the boundary
};

struct OptResult {
    CovariancePair pair;
    RateTriple triple;
    double objective = 0.0;  // bits, clamped weighted objective of `pair`
    int restarts_used = 0;
    bool converged = false;
    std::uint64_t seed = 0;
    Weights weights;
};

namespace detail {

/// One weighted problem: maximize  w0 * min_j common_j(K) + objective(K)  (log-det units).
struct Problem {
    VariableLayout layout;
    Matrix S;
    double common_weight = 1.0;
    std::vector<LogDetExpr> common;
    LogDetExpr objective;
    LogDetExpr barrier;
    double nu = 0.0;

    Problem(int t, bool has_k2, bool has_common) : layout(t, has_k2, has_common) {}

    double true_value(const Matrix& k1, const Matrix& k2) const {
        double v = objective.value(k1, k2);
        if (layout.has_r()) {
            double m = std::numeric_limits<double>::infinity();
            for (const auto& c : common) m = std::min(m, c.value(k1, k2));
            v += common_weight * m;
        }
        return v;
    }
};

inline Problem make_problem(const ChannelModel& model, const RateExpressions& x, double w0,
                            double w1, double w2, bool has_k2) {
    const int t = model.t;
    const Matrix eye = Matrix::Identity(t, t);
    const Matrix zero = Matrix::Zero(t, t);
    Problem p(t, has_k2, w0 > 0.0);
    p.S = model.S;
    p.common_weight = w0;
    if (w0 > 0.0) p.common = {x.r01, x.r02};
    p.objective.append(x.r1, w1);
    if (has_k2) p.objective.append(x.r2, w2);
    p.barrier.add(1.0, zero, eye, 1.0, 0.0);
    if (has_k2) p.barrier.add(1.0, zero, eye, 0.0, 1.0);
    p.barrier.add(1.0, model.S, eye, -1.0, has_k2 ? -1.0 : 0.0);
    p.nu = t * (has_k2 ? 3.0 : 2.0) + (w0 > 0.0 ? 2.0 : 0.0);
    return p;
}

struct Evaluation {
    double F = 0.0;
    Vector grad;
    Matrix hess;
};

// F_tau(x) = tau * f(x) + barrier(x); nullopt outside the interior.
inline std::optional<Evaluation> evaluate_barrier(const Problem& p, double tau, const Vector& x,
                                                  bool with_hessian) {
    const auto& L = p.layout;
    const Matrix k1 = L.k1(x);
    const Matrix k2 = L.k2(x);
    const int n = L.size();
    Evaluation e;
    e.grad = Vector::Zero(n);
    if (with_hessian) e.hess = Matrix::Zero(n, n);

    const auto bar = evaluate(p.barrier, L, k1, k2, with_hessian);
    if (!bar) return std::nullopt;
    const auto obj = evaluate(p.objective, L, k1, k2, with_hessian);
    if (!obj) return std::nullopt;
    e.F = bar->value + tau * obj->value;
    e.grad = bar->grad + tau * obj->grad;
    if (with_hessian) e.hess = bar->hess + tau * obj->hess;

    if (L.has_r()) {
        const double r = L.r(x);
        const int ri = L.r_index();
        e.F += tau * p.common_weight * r;
        e.grad(ri) += tau * p.common_weight;
        for (const auto& c : p.common) {
            auto d = evaluate(c, L, k1, k2, with_hessian);
            if (!d) return std::nullopt;
            const double s = d->value - r;
            if (!(s > 0.0)) return std::nullopt;
            d->grad(ri) = -1.0;
            e.F += std::log(s);
            e.grad += d->grad / s;
            if (with_hessian) e.hess += d->hess / s - d->grad * d->grad.transpose() / (s * s);
        }
    }
    return e;
}

struct CenterOutcome {
    bool ok = false;           // decrement criterion reached
    double decrement = 0.0;
};

inline CenterOutcome center(const Problem& p, double tau, Vector& x, int max_iters) {
    CenterOutcome out;
    auto cur = evaluate_barrier(p, tau, x, true);
    if (!cur) return out;
    for (int it = 0; it < max_iters; ++it) {
        // Jacobi scaling, then |eigenvalue| modification in the scaled coordinates.
        const Vector dscale =
            cur->hess.diagonal().cwiseAbs().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
        const Matrix hs = dscale.asDiagonal() * cur->hess * dscale.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Matrix> es(hs);
        const Vector& h = es.eigenvalues();
        const double hmax = h.cwiseAbs().maxCoeff();
        const double floor = std::max(1e-14 * hmax, 1e-300);
        const Vector scale = h.cwiseAbs().cwiseMax(floor).cwiseInverse();
        const Matrix& V = es.eigenvectors();
        const Vector gs = dscale.cwiseProduct(cur->grad);
        const Vector d = dscale.cwiseProduct(V * scale.asDiagonal() * (V.transpose() * gs));
        const double dec2 = cur->grad.dot(d);
        out.decrement = dec2;
        if (!(dec2 > 1e-14)) {
            out.ok = true;
            return out;
        }
        // Backtracking with an allowance for rounding in F.
        const double slack = 1e-13 * std::abs(cur->F) + 1e-15;
        double alpha = 1.0;
        bool moved = false;
        bool stalled = false;
        for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
            const Vector xn = x + alpha * d;
            auto trial = evaluate_barrier(p, tau, xn, false);
            if (!trial) continue;
            if (trial->F >= cur->F + 1e-4 * alpha * dec2 - slack) {
                stalled = trial->F - cur->F <= slack;
                x = xn;
                moved = true;
                break;
            }
        }
        if (!moved) {
            out.ok = dec2 < 1e-6;
            return out;
        }
        if (stalled && dec2 < 1e-6) {
            out.ok = true;
            return out;
        }
        cur = evaluate_barrier(p, tau, x, true);
        if (!cur) return out;
    }
    return out;
}

inline Matrix random_orthogonal(int t, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Matrix g(t, t);
    for (int i = 0; i < t; ++i)
        for (int j = 0; j < t; ++j) g(i, j) = nd(rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    return qr.householderQ() * Matrix::Identity(t, t);
}

inline Matrix random_unit_psd(int t, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const Matrix q = random_orthogonal(t, rng);
    Vector ev(t);
    for (int i = 0; i < t; ++i) ev(i) = ud(rng);
    return symmetrize(q * ev.asDiagonal() * q.transpose());
}

// Start points in whitened coordinates: K = S^{1/2} P S^{1/2}.
inline std::vector<std::pair<Matrix, Matrix>> start_points(int t, bool has_k2, int restarts,
                                                           std::uint64_t seed) {
    const Matrix eye = Matrix::Identity(t, t);
    const double eps = 1e-3;
    std::vector<std::pair<Matrix, Matrix>> starts;
    starts.push_back({eps * eye, eps * eye});
    starts.push_back({0.5 * eye, eps * eye});
    starts.push_back({eps * eye, 0.5 * eye});
    for (int k = 0; k < restarts; ++k) {
        std::seed_seq sseq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                           static_cast<std::uint32_t>(k), 0x5eedu};
        std::mt19937_64 rng(sseq);
        std::uniform_real_distribution<double> ud(0.05, 0.95);
        Matrix a = random_unit_psd(t, rng) + eps * eye;
        Matrix b = has_k2 ? Matrix(random_unit_psd(t, rng) + eps * eye) : Matrix(eps * eye);
        const double total = ud(rng);
        const double scale = total / max_eigenvalue(a + b);
        starts.push_back({scale * a, scale * b});
    }
    return starts;
}

struct PathState {
    Vector x;
    double tau = 0.0;
    int index = 0;
    bool ok = true;
    double value = -std::numeric_limits<double>::infinity();
};

inline void follow(const Problem& p, PathState& st, double tau_end, const OptOptions& opts) {
    for (;;) {
        const auto c = center(p, st.tau, st.x, opts.max_iters);
        st.ok = st.ok && c.ok;
        if (st.tau >= tau_end) break;
        st.tau = std::min(st.tau * opts.step, tau_end);
    }
    st.value = p.true_value(p.layout.k1(st.x), p.layout.k2(st.x));
}

// Places near-boundary eigenvalues exactly on the boundary of the feasible set.
inline CovariancePair snap_to_boundary(const Matrix& s, Matrix k1, Matrix k2, double snap) {
    auto clip = [snap](const Matrix& k) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(k));
        Vector ev = es.eigenvalues();
        for (int i = 0; i < ev.size(); ++i)
            if (ev(i) < snap) ev(i) = 0.0;
        return symmetrize(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose());
    };
    k1 = clip(k1);
    k2 = clip(k2);
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(s - k1 - k2));
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const double z = es.eigenvalues()(i);
        if (z >= snap) continue;
        const Vector w = es.eigenvectors().col(i);
        const Matrix fill = z * w * w.transpose();
        if (w.dot(k1 * w) >= w.dot(k2 * w))
            k1 += fill;
        else
            k2 += fill;
    }
    return {symmetrize(k1), symmetrize(k2)};
}

struct Solution {
    CovariancePair pair;
    bool converged = false;
    int starts = 0;
};

inline Solution solve(const Problem& p, const OptOptions& opts) {
    const int t = p.layout.t();
    const bool has_k2 = p.layout.has_k2();
    const Matrix half = sqrt_psd(p.S);
    const auto starts = start_points(t, has_k2, opts.restarts, opts.seed);
    const double tau_end = std::max(p.nu / opts.tol, opts.initial_tau);
    const double tau_explore = std::min(opts.explore_tau, tau_end);

    std::vector<PathState> states;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const Matrix k1 = symmetrize(half * starts[i].first * half);
        const Matrix k2 = has_k2 ? Matrix(symmetrize(half * starts[i].second * half))
                                 : Matrix::Zero(t, t);
        double r = 0.0;
        if (p.layout.has_r()) {
            r = std::numeric_limits<double>::infinity();
            for (const auto& c : p.common) r = std::min(r, c.value(k1, k2));
            r -= 1.0;
        }
        PathState st;
        st.x = p.layout.pack(k1, k2, r);
        st.tau = opts.initial_tau;
        st.index = static_cast<int>(i);
        follow(p, st, tau_explore, opts);
        states.push_back(std::move(st));
    }
    std::stable_sort(states.begin(), states.end(),
                     [](const PathState& a, const PathState& b) { return a.value > b.value; });
    const auto keep = std::min<std::size_t>(states.size(),
                                            static_cast<std::size_t>(std::max(1, opts.polish_candidates)));
    states.resize(keep);

    Solution best;
    double best_value = -std::numeric_limits<double>::infinity();
    int best_index = std::numeric_limits<int>::max();
    for (auto& st : states) {
        follow(p, st, tau_end, opts);
        const CovariancePair snapped =
            snap_to_boundary(p.S, p.layout.k1(st.x), p.layout.k2(st.x), opts.snap);
        const double v = p.true_value(snapped.K1, snapped.K2);
        if (v > best_value || (v == best_value && st.index < best_index)) {
            best_value = v;
            best_index = st.index;
            best.pair = snapped;
            best.converged = st.ok;
        }
    }
    best.starts = static_cast<int>(starts.size());
    return best;
}

inline void require_strict_s(const ChannelModel& model) {
    if (!s_strictly_pd(model))
        throw InvalidInstance("optimizer requires S strictly positive-definite");
}

}  // namespace detail

/// Maximizes min(R01, R02) + mu1 R1 + mu2 R2 over feasible (K1, K2).
/// The search works on the signed confidential rates; the returned objective is the
/// clamped weighted objective of the returned pair.
inline OptResult maximize_weighted(const ChannelModel& model, const Weights& weights,
                                   Scheme scheme, Order order, const OptOptions& opts = {}) {
    require_weights(weights);
    detail::require_strict_s(model);
    const auto exprs = rate_expressions(model, scheme, order);
    const auto problem = detail::make_problem(model, exprs, 1.0, weights.mu1, weights.mu2, true);
    const auto sol = detail::solve(problem, opts);
    OptResult res;
    res.pair = sol.pair;
    res.triple = rate_triple(model, sol.pair, scheme, order);
    res.objective = weighted_value(res.triple, weights);
    res.restarts_used = sol.starts;
    res.converged = sol.converged;
    res.seed = opts.seed;
    res.weights = weights;
    return res;
}

struct WiretapResult {
    Matrix K;
    double secrecy_rate = 0.0;  // bits
    bool converged = false;
};

/// max over 0 <= K <= S of R1(K, 0): user 1 legitimate, user 2 eavesdropper.
inline WiretapResult maximize_wiretap(const ChannelModel& model, const OptOptions& opts = {}) {
    detail::require_strict_s(model);
    const auto exprs = rate_expressions(model, Scheme::SDPC, Order::O12);
    const auto problem = detail::make_problem(model, exprs, 0.0, 1.0, 0.0, false);
    const auto sol = detail::solve(problem, opts);
    WiretapResult res;
    res.K = sol.pair.K1;
    res.secrecy_rate =
        sdpc_rate_triple(model, {sol.pair.K1, Matrix::Zero(model.t, model.t)}, Order::O12).r1_raw;
    res.converged = sol.converged;
    return res;
}

/// Exhaustive search over (k1, k2) on a grid_n x grid_n grid of the simplex
/// {k1, k2 >= 0, k1 + k2 <= s}. Scalar aligned channels only.
inline OptResult scalar_grid_oracle(const ChannelModel& model, const Weights& weights,
                                    Scheme scheme, Order order, int grid_n) {
    require_weights(weights);
    if (model.t != 1 || !model.aligned)
        throw UnsupportedConfiguration("scalar_grid_oracle requires a scalar aligned channel");
    if (grid_n < 2) throw std::invalid_argument("grid_n must be at least 2");
    const double s = model.S(0, 0);
    const double s1 = model.user1.Sigma(0, 0);
    const double s2 = model.user2.Sigma(0, 0);
    const int n = grid_n;
    const double h = s / (n - 1);
    // log(k + sigma_j) for every grid value of k.
    std::vector<double> l1(static_cast<std::size_t>(n)), l2(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        l1[static_cast<std::size_t>(i)] = std::log(i * h + s1);
        l2[static_cast<std::size_t>(i)] = std::log(i * h + s2);
    }
    const double ls1 = std::log(s + s1), ls2 = std::log(s + s2);
    const double b = kBitsPerLogdet;
    // In order 12 the inner covariance is k2; in order 21 it is k1.
    const bool o12 = order == Order::O12;
    double best = -std::numeric_limits<double>::infinity();
    int bi = 0, bj = 0;
    for (int i = 0; i < n; ++i) {          // k1 index
        for (int j = 0; i + j < n; ++j) {  // k2 index
            const auto sum = static_cast<std::size_t>(i + j);
            const auto inner = static_cast<std::size_t>(o12 ? j : i);
            const double r01 = b * (ls1 - l1[sum]);
            const double r02 = b * (ls2 - l2[sum]);
            double ra, rb;  // outer user's rate, inner user's rate
            if (scheme == Scheme::SDPC) {
                if (o12) {
                    ra = b * ((l1[sum] - l1[inner]) - (l2[sum] - l2[inner]));
                    rb = b * ((l2[inner] - l2[0]) - (l1[inner] - l1[0]));
                } else {
                    ra = b * ((l2[sum] - l2[inner]) - (l1[sum] - l1[inner]));
                    rb = b * ((l1[inner] - l1[0]) - (l2[inner] - l2[0]));
                }
            } else {
                if (o12) {
                    ra = b * (l1[sum] - l1[inner]);
                    rb = b * (l2[inner] - l2[0]);
                } else {
                    ra = b * (l2[sum] - l2[inner]);
                    rb = b * (l1[inner] - l1[0]);
                }
            }
            const double r1 = o12 ? ra : rb;
            const double r2 = o12 ? rb : ra;
            const double v =
                std::min(r01, r02) + weights.mu1 * std::max(0.0, r1) + weights.mu2 * std::max(0.0, r2);
            if (v > best) {
                best = v;
                bi = i;
                bj = j;
            }
        }
    }
    OptResult res;
    res.pair = {Matrix::Constant(1, 1, bi * h), Matrix::Constant(1, 1, bj * h)};
    // Keep the pair feasible despite rounding in i * h + j * h.
    if (res.pair.K1(0, 0) + res.pair.K2(0, 0) > s) res.pair.K2(0, 0) = s - res.pair.K1(0, 0);
    res.triple = rate_triple(model, res.pair, scheme, order);
    res.objective = weighted_value(res.triple, weights);
    res.restarts_used = 0;
    res.converged = true;
    res.weights = weights;
    return res;
}

}  // namespace mimobc
