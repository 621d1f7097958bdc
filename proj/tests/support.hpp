#pragma once
// Random instances shared by the test suites.

#include "mimobc/channel.hpp"
#include "mimobc/logdet.hpp"
#include "mimobc/optimizer.hpp"

#include <random>

namespace mimobc::fixtures {

inline Matrix random_pd(std::mt19937_64& g, int t, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    const Matrix q = detail::random_orthogonal(t, g);
    Vector e(t);
    for (int i = 0; i < t; ++i) e(i) = u(g);
    return symmetrize(q * e.asDiagonal() * q.transpose());
}

/// Sigma_j with eigenvalues in [0.5, 4]; S PD with trace uniform on [1, 4].
inline ChannelModel random_aligned(std::mt19937_64& g, int t = 2) {
    const Matrix s1 = random_pd(g, t, 0.5, 4.0);
    const Matrix s2 = random_pd(g, t, 0.5, 4.0);
    Matrix s = random_pd(g, t, 0.1, 1.0);
    std::uniform_real_distribution<double> tr(1.0, 4.0);
    s *= tr(g) / s.trace();
    return make_aligned(s1, s2, s);
}

inline ChannelModel random_scalar(std::mt19937_64& g) {
    std::uniform_real_distribution<double> n(0.5, 4.0), p(0.25, 4.0);
    const double a = n(g), b = n(g), s = p(g);
    return make_scalar(a, b, s);
}

/// General (non-aligned) channel with r_j x t gains.
inline ChannelModel random_general(std::mt19937_64& g, int t, int r1, int r2) {
    std::normal_distribution<double> nd;
    ChannelModel m;
    m.t = t;
    m.user1.H = Matrix(r1, t);
    m.user2.H = Matrix(r2, t);
    for (auto* h : {&m.user1.H, &m.user2.H})
        for (Eigen::Index i = 0; i < h->size(); ++i) h->data()[i] = nd(g);
    m.user1.Sigma = random_pd(g, r1, 0.5, 4.0);
    m.user2.Sigma = random_pd(g, r2, 0.5, 4.0);
    m.S = random_pd(g, t, 0.2, 1.5);
    return make_channel(m);
}

/// Random feasible pair: K1 + K2 = S^{1/2} Q diag(u) Q^T S^{1/2} split by a random fraction.
inline CovariancePair random_pair(std::mt19937_64& g, const Matrix& s, bool strict = true) {
    const int t = static_cast<int>(s.rows());
    std::uniform_real_distribution<double> u(strict ? 0.05 : 0.0, strict ? 0.9 : 1.0);
    const Matrix half = sqrt_psd(s);
    auto piece = [&]() {
        const Matrix q = detail::random_orthogonal(t, g);
        Vector e(t);
        for (int i = 0; i < t; ++i) e(i) = 0.5 * u(g);
        return Matrix(symmetrize(half * q * e.asDiagonal() * q.transpose() * half));
    };
    return {piece(), piece()};
}

struct GradientCheck {
    double relative_error = 0.0;  // |g_fd - g| / max(|g|, 1e-8)
    double grad_norm = 0.0;
};

/// Closed-form gradient of `expr` against central differences with step h on every
/// packed coordinate of (K1, K2).
inline GradientCheck check_gradient(const LogDetExpr& expr, const CovariancePair& p, double h = 1e-5) {
    const int t = static_cast<int>(p.K1.rows());
    const VariableLayout layout(t, true, false);
    const auto d = evaluate(expr, layout, p.K1, p.K2, false);
    if (!d) throw NotPositiveDefinite("gradient check at an infeasible point");
    const Vector x = layout.pack(p.K1, p.K2, 0.0);
    Vector fd(layout.size());
    for (int i = 0; i < layout.size(); ++i) {
        Vector xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        fd(i) = (expr.value(layout.k1(xp), layout.k2(xp)) - expr.value(layout.k1(xm), layout.k2(xm))) /
                (2.0 * h);
    }
    GradientCheck c;
    c.grad_norm = d->grad.norm();
    c.relative_error = (fd - d->grad).norm() / std::max(c.grad_norm, 1e-8);
    return c;
}

}  // namespace mimobc::fixtures
