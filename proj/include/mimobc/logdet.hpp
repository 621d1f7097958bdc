#pragma once
// Log-det terms  coeff * log|C + H (a1 K1 + a2 K2) H^T|  over packed symmetric variables,
// with closed-form gradients and Hessians.

#include "mimobc/channel.hpp"

#include <array>
#include <vector>

namespace mimobc {

/// Packing of (K1, K2, r) into a flat vector. Each K block stores the upper triangle
/// row by row; entry (i, j) with i != j multiplies the basis matrix e_i e_j^T + e_j e_i^T.
class VariableLayout {
public:
    VariableLayout(int t, bool has_k2, bool has_r) : t_(t), has_k2_(has_k2), has_r_(has_r) {
        for (int i = 0; i < t; ++i)
            for (int j = i; j < t; ++j) index_.push_back({i, j});
    }

    int t() const { return t_; }
    int block_size() const { return static_cast<int>(index_.size()); }
    bool has_k2() const { return has_k2_; }
    bool has_r() const { return has_r_; }
    int k1_offset() const { return 0; }
    int k2_offset() const { return block_size(); }
    int r_index() const { return block_size() * (has_k2_ ? 2 : 1); }
    int size() const { return r_index() + (has_r_ ? 1 : 0); }
    std::array<int, 2> entry(int a) const { return index_[static_cast<std::size_t>(a)]; }

    Matrix unpack_block(const Vector& x, int offset) const {
        Matrix k(t_, t_);
        for (int a = 0; a < block_size(); ++a) {
            const auto [i, j] = index_[static_cast<std::size_t>(a)];
            k(i, j) = k(j, i) = x(offset + a);
        }
        return k;
    }
    Matrix k1(const Vector& x) const { return unpack_block(x, k1_offset()); }
    Matrix k2(const Vector& x) const {
        return has_k2_ ? unpack_block(x, k2_offset()) : Matrix::Zero(t_, t_);
    }
    double r(const Vector& x) const { return has_r_ ? x(r_index()) : 0.0; }

    void pack_block(const Matrix& k, Vector& x, int offset) const {
        for (int a = 0; a < block_size(); ++a) {
            const auto [i, j] = index_[static_cast<std::size_t>(a)];
            x(offset + a) = 0.5 * (k(i, j) + k(j, i));
        }
    }
    Vector pack(const Matrix& k1, const Matrix& k2, double r) const {
        Vector x = Vector::Zero(size());
        pack_block(k1, x, k1_offset());
        if (has_k2_) pack_block(k2, x, k2_offset());
        if (has_r_) x(r_index()) = r;
        return x;
    }

private:
    int t_;
    bool has_k2_;
    bool has_r_;
    std::vector<std::array<int, 2>> index_;
};

struct LogDetTerm {
    double coeff = 1.0;
    Matrix C;  // r x r
    Matrix H;  // r x t
    double a1 = 0.0;
    double a2 = 0.0;

    Matrix argument(const Matrix& k1, const Matrix& k2) const {
        return symmetrize(C + H * (a1 * k1 + a2 * k2) * H.transpose());
    }
};

/// A sum of log-det terms plus a constant.
struct LogDetExpr {
    std::vector<LogDetTerm> terms;
    double constant = 0.0;

    LogDetExpr& add(double coeff, const Matrix& c, const Matrix& h, double a1, double a2) {
        if (coeff != 0.0) terms.push_back({coeff, c, h, a1, a2});
        return *this;
    }
    /// coeff * log|C| folded into the constant.
    LogDetExpr& add_constant_logdet(double coeff, const Matrix& c) {
        constant += coeff * logdet_pd(c);
        return *this;
    }
    LogDetExpr& append(const LogDetExpr& other, double scale = 1.0) {
        for (auto term : other.terms) {
            term.coeff *= scale;
            if (term.coeff != 0.0) terms.push_back(std::move(term));
        }
        constant += scale * other.constant;
        return *this;
    }

    double value(const Matrix& k1, const Matrix& k2) const {
        double v = constant;
        for (const auto& term : terms) v += term.coeff * logdet_pd(term.argument(k1, k2));
        return v;
    }
};

namespace detail {

// Returns false when some argument is not positive definite.
inline bool factor_argument(const LogDetTerm& term, const Matrix& k1, const Matrix& k2,
                            double& logdet, Matrix& inv) {
    const Matrix m = term.argument(k1, k2);
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) return false;
    const Matrix& l = llt.matrixL();
    const Vector d = l.diagonal();
    if (d.minCoeff() <= 0.0) return false;
    logdet = 2.0 * d.array().log().sum();
    inv = llt.solve(Matrix::Identity(m.rows(), m.cols()));
    return true;
}

inline double basis_trace(const Matrix& w, int i, int j) {
    return i == j ? w(i, i) : 2.0 * w(i, j);
}

// tr(W E_a W E_b) for symmetric basis matrices E_a, E_b.
inline double basis_trace2(const Matrix& w, std::array<int, 2> a, std::array<int, 2> b) {
    const std::array<std::array<int, 2>, 2> pa{{{a[0], a[1]}, {a[1], a[0]}}};
    const std::array<std::array<int, 2>, 2> pb{{{b[0], b[1]}, {b[1], b[0]}}};
    const int na = a[0] == a[1] ? 1 : 2;
    const int nb = b[0] == b[1] ? 1 : 2;
    double s = 0.0;
    for (int p = 0; p < na; ++p)
        for (int q = 0; q < nb; ++q) s += w(pa[p][1], pb[q][0]) * w(pb[q][1], pa[p][0]);
    return s;
}

}  // namespace detail

/// Value, gradient and Hessian of an expression (or of log(expr - r)).
struct Derivatives {
    double value = 0.0;
    Vector grad;
    Matrix hess;
};

/// Evaluates expr and accumulates derivatives w.r.t. the K blocks of `layout`.
/// Returns nullopt when an argument leaves the PD cone.
inline std::optional<Derivatives> evaluate(const LogDetExpr& expr, const VariableLayout& layout,
                                           const Matrix& k1, const Matrix& k2,
                                           bool with_hessian = true) {
    const int n = layout.size();
    const int nb = layout.block_size();
    Derivatives out;
    out.value = expr.constant;
    out.grad = Vector::Zero(n);
    if (with_hessian) out.hess = Matrix::Zero(n, n);
    Matrix inv;
    for (const auto& term : expr.terms) {
        double ld = 0.0;
        if (!detail::factor_argument(term, k1, k2, ld, inv)) return std::nullopt;
        out.value += term.coeff * ld;
        const Matrix w = term.H.transpose() * inv * term.H;
        const std::array<double, 2> alpha{term.a1, layout.has_k2() ? term.a2 : 0.0};
        const std::array<int, 2> offset{layout.k1_offset(), layout.k2_offset()};
        for (int v = 0; v < 2; ++v) {
            if (alpha[v] == 0.0) continue;
            for (int a = 0; a < nb; ++a) {
                const auto e = layout.entry(a);
                out.grad(offset[v] + a) += term.coeff * alpha[v] * detail::basis_trace(w, e[0], e[1]);
            }
        }
        if (!with_hessian) continue;
        for (int a = 0; a < nb; ++a) {
            for (int b = a; b < nb; ++b) {
                const double tr = detail::basis_trace2(w, layout.entry(a), layout.entry(b));
                for (int v = 0; v < 2; ++v) {
                    if (alpha[v] == 0.0) continue;
                    for (int u = 0; u < 2; ++u) {
                        if (alpha[u] == 0.0) continue;
                        const double h = -term.coeff * alpha[v] * alpha[u] * tr;
                        out.hess(offset[v] + a, offset[u] + b) += h;
                        if (b != a) out.hess(offset[v] + b, offset[u] + a) += h;
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace mimobc
