#pragma once
// Recovery of KKT multipliers (M1, M2, MS, lambda) at a candidate optimum of the weighted
// S-DPC problem and of its non-secret counterpart, for aligned channels.
//
// Stationarity, in log-det units (the 1/2 of every rate dropped), with
// A_j = (K1 + K2 + Sigma_j)^{-1} and B_j = (K2 + Sigma_j)^{-1}:
//
//   (mu1 + mu2) A1 + M1 = (lambda + mu2) A1 + (1 - lambda + mu1) A2 + MS
//   (mu1 + mu2) B2 + M2 = (mu1 + mu2) B1 + M1
//
// Each multiplier is confined to the kernel eigenspace of its slackness partner
// (K1, K2 and S - K1 - K2), so complementary slackness holds by construction up to the
// kernel threshold; the remaining unknowns are fitted by least squares over the PSD cone.

#include "mimobc/channel.hpp"
#include "mimobc/rates.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>

namespace mimobc {

struct KKTOptions {
    double kernel_tol = 1e-8;        // eigenvalues below this count as zero
    double tie_tol_bits = 1e-6;      // |R01 - R02| at or below this is a tie
    double stationarity_tol = 1e-5;
    double slackness_tol = 1e-6;
    double psd_tol = 1e-8;
};

struct KKTCertificate {
    Matrix M1, M2, MS;
    double lambda = 0.0;  // lambda-bar = 1 - lambda
    double residual_stationarity = 0.0;
    double residual_slackness = 0.0;
    bool lambda_rule_ok = false;
    double min_multiplier_eigenvalue = 0.0;
    bool tie = false;
    Order order = Order::O12;

    double lambda_bar() const { return 1.0 - lambda; }
    bool multipliers_psd(double tol = 1e-8) const { return min_multiplier_eigenvalue >= -tol; }
    bool accepted(const KKTOptions& o = {}) const {
        return residual_stationarity <= o.stationarity_tol && residual_slackness <= o.slackness_tol &&
               multipliers_psd(o.psd_tol) && lambda_rule_ok;
    }
};

namespace detail {

inline Matrix kernel_basis(const Matrix& a, double tol) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a));
    std::vector<int> cols;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) < tol) cols.push_back(i);
    Matrix u(a.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c)
        u.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(cols[c]);
    return u;
}

// Equations  M1 - MS - c_lambda * lambda * (A1 - A2) = G1,  M2 - M1 = G2.
struct StationaritySystem {
    Matrix A1, A2, G1, G2;
    double c_lambda = 1.0;
    bool lambda_free = true;
    double lambda_fixed = 0.0;
    Matrix U1, U2, US;  // kernel bases
};

class SymVec {
public:
    explicit SymVec(int n) : n_(n) {}
    int size() const { return n_ * (n_ + 1) / 2; }
    // Frobenius-isometric packing.
    Vector pack(const Matrix& m) const {
        Vector v(size());
        int k = 0;
        for (int i = 0; i < n_; ++i)
            for (int j = i; j < n_; ++j) v(k++) = i == j ? m(i, i) : std::sqrt(2.0) * m(i, j);
        return v;
    }
    Matrix unpack(const Vector& v, int offset) const {
        Matrix m(n_, n_);
        int k = offset;
        for (int i = 0; i < n_; ++i)
            for (int j = i; j < n_; ++j, ++k) {
                if (i == j)
                    m(i, i) = v(k);
                else
                    m(i, j) = m(j, i) = v(k) / std::sqrt(2.0);
            }
        return m;
    }

private:
    int n_;
};

struct MultiplierFit {
    Matrix M1, M2, MS;
    double lambda = 0.0;
};

class MultiplierSolver {
public:
    explicit MultiplierSolver(const StationaritySystem& sys)
        : sys_(sys),
          t_(static_cast<int>(sys.A1.rows())),
          eq_(t_),
          x1_(static_cast<int>(sys.U1.cols())),
          x2_(static_cast<int>(sys.U2.cols())),
          xs_(static_cast<int>(sys.US.cols())) {
        o1_ = 0;
        o2_ = o1_ + x1_.size();
        os_ = o2_ + x2_.size();
        ol_ = os_ + xs_.size();
        n_ = ol_ + (sys.lambda_free ? 1 : 0);
        const int ne = eq_.size();
        A_ = Matrix::Zero(2 * ne, n_);
        b_ = Vector::Zero(2 * ne);
        Matrix g1 = sys.G1;
        if (!sys.lambda_free) g1 += sys.c_lambda * sys.lambda_fixed * (sys.A1 - sys.A2);
        b_.head(ne) = eq_.pack(g1);
        b_.tail(ne) = eq_.pack(sys.G2);
        fill_block(sys.U1, x1_, o1_, +1.0, -1.0);
        fill_block(sys.U2, x2_, o2_, 0.0, +1.0);
        fill_block(sys.US, xs_, os_, -1.0, 0.0);
        if (sys.lambda_free) A_.col(ol_).head(ne) = -sys.c_lambda * eq_.pack(sys.A1 - sys.A2);
    }

    MultiplierFit solve() const {
        Vector theta = Vector::Zero(n_);
        if (n_ > 0) {
            Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A_);
            theta = cod.solve(b_);
        }
        Vector proj = project(theta);
        const double ls_obj = objective(theta);
        if (objective(proj) > ls_obj + 1e-24 && n_ > 0) proj = refine(proj);
        return unpack(proj);
    }

private:
    void fill_block(const Matrix& u, const SymVec& xv, int offset, double in_e1, double in_e2) {
        const int k = static_cast<int>(u.cols());
        const int ne = eq_.size();
        int col = offset;
        for (int i = 0; i < k; ++i)
            for (int j = i; j < k; ++j, ++col) {
                // Column for the Frobenius-normalized basis element of X.
                Matrix e = Matrix::Zero(k, k);
                if (i == j)
                    e(i, i) = 1.0;
                else
                    e(i, j) = e(j, i) = 1.0 / std::sqrt(2.0);
                const Vector v = eq_.pack(u * e * u.transpose());
                if (in_e1 != 0.0) A_.col(col).head(ne) = in_e1 * v;
                if (in_e2 != 0.0) A_.col(col).tail(ne) = in_e2 * v;
            }
        (void)xv;
    }

    double objective(const Vector& th) const {
        return n_ > 0 ? 0.5 * (A_ * th - b_).squaredNorm() : 0.5 * b_.squaredNorm();
    }

    Vector project(Vector th) const {
        auto proj_block = [&](const SymVec& xv, int off) {
            if (xv.size() == 0) return;
            th.segment(off, xv.size()) = xv.pack(psd_project(xv.unpack(th, off)));
        };
        proj_block(x1_, o1_);
        proj_block(x2_, o2_);
        proj_block(xs_, os_);
        if (sys_.lambda_free) th(ol_) = std::clamp(th(ol_), 0.0, 1.0);
        return th;
    }

    // Accelerated projected gradient on 0.5 |A theta - b|^2 over the PSD blocks and [0, 1].
    Vector refine(Vector th) const {
        const double lip = std::max(Eigen::JacobiSVD<Matrix>(A_).singularValues()(0), 1e-300);
        const double step = 1.0 / (lip * lip);
        Vector best = th, y = th, prev = th;
        double best_obj = objective(th);
        double tk = 1.0;
        for (int it = 0; it < 20000; ++it) {
            const Vector g = A_.transpose() * (A_ * y - b_);
            const Vector xn = project(y - step * g);
            const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
            y = xn + ((tk - 1.0) / tn) * (xn - prev);
            prev = xn;
            tk = tn;
            const double obj = objective(xn);
            if (obj < best_obj) {
                const bool small_gain = best_obj - obj < 1e-30;
                best_obj = obj;
                best = xn;
                if (small_gain && it > 200) break;
            }
        }
        return best;
    }

    MultiplierFit unpack(const Vector& th) const {
        MultiplierFit f;
        auto lift = [&](const Matrix& u, const SymVec& xv, int off) -> Matrix {
            if (xv.size() == 0) return Matrix::Zero(t_, t_);
            return symmetrize(u * xv.unpack(th, off) * u.transpose());
        };
        f.M1 = lift(sys_.U1, x1_, o1_);
        f.M2 = lift(sys_.U2, x2_, o2_);
        f.MS = lift(sys_.US, xs_, os_);
        f.lambda = sys_.lambda_free ? th(ol_) : sys_.lambda_fixed;
        return f;
    }

    const StationaritySystem& sys_;
    int t_;
    SymVec eq_, x1_, x2_, xs_;
    int o1_ = 0, o2_ = 0, os_ = 0, ol_ = 0, n_ = 0;
    Matrix A_;
    Vector b_;
};

struct PlainCoefficients {
    double c_lambda;  // multiplies lambda (A1 - A2)
    double c_a2;      // G1 = c_a2 A2 - c_a1 A1
    double c_a1;
    double c_b;       // G2 = c_b (B1 - B2)
};

enum class LambdaMode { Rule, Free };

inline KKTCertificate recover12(const ChannelModel& m, const CovariancePair& p,
                                const PlainCoefficients& c, LambdaMode mode, double r01_bits,
                                double r02_bits, const KKTOptions& o) {
    const Matrix k = p.K1 + p.K2;
    const Matrix& s1 = m.user1.Sigma;
    const Matrix& s2 = m.user2.Sigma;
    StationaritySystem sys;
    sys.A1 = inverse_pd(k + s1);
    sys.A2 = inverse_pd(k + s2);
    const Matrix b1 = inverse_pd(p.K2 + s1);
    const Matrix b2 = inverse_pd(p.K2 + s2);
    sys.G1 = c.c_a2 * sys.A2 - c.c_a1 * sys.A1;
    sys.G2 = c.c_b * (b1 - b2);
    sys.c_lambda = c.c_lambda;
    const Matrix z = m.S - k;
    sys.U1 = kernel_basis(p.K1, o.kernel_tol);
    sys.U2 = kernel_basis(p.K2, o.kernel_tol);
    sys.US = kernel_basis(z, o.kernel_tol);

    KKTCertificate cert;
    cert.tie = std::abs(r01_bits - r02_bits) <= o.tie_tol_bits;
    if (mode == LambdaMode::Rule && !cert.tie) {
        sys.lambda_free = false;
        sys.lambda_fixed = r01_bits > r02_bits ? 0.0 : 1.0;
    }
    const auto fit = MultiplierSolver(sys).solve();
    cert.M1 = fit.M1;
    cert.M2 = fit.M2;
    cert.MS = fit.MS;
    cert.lambda = fit.lambda;

    const Matrix e1 = cert.M1 - cert.MS - c.c_lambda * cert.lambda * (sys.A1 - sys.A2) - sys.G1;
    const Matrix e2 = cert.M2 - cert.M1 - sys.G2;
    cert.residual_stationarity = std::max(e1.norm(), e2.norm());
    cert.residual_slackness =
        std::max({(p.K1 * cert.M1).norm(), (p.K2 * cert.M2).norm(), (z * cert.MS).norm()});
    cert.min_multiplier_eigenvalue =
        std::min({min_eigenvalue(cert.M1), min_eigenvalue(cert.M2), min_eigenvalue(cert.MS)});
    const bool in_range = cert.lambda >= 0.0 && cert.lambda <= 1.0;
    if (mode == LambdaMode::Free || cert.tie)
        cert.lambda_rule_ok = in_range;
    else
        cert.lambda_rule_ok = cert.lambda == (r01_bits > r02_bits ? 0.0 : 1.0);
    return cert;
}

inline void require_kkt_inputs(const ChannelModel& m, const CovariancePair& p) {
    if (!m.aligned)
        throw UnsupportedConfiguration("KKT recovery requires an aligned channel (H1 = H2 = I)");
    require_feasible(m, p);
}

}  // namespace detail

/// Multipliers for the weighted S-DPC problem at `pair`; lambda follows the case rule
/// on R01 vs R02 (free in [0, 1] at a tie). Order 21 is handled by exchanging the users.
inline KKTCertificate recover_kkt_sdpc(const ChannelModel& model, const CovariancePair& pair,
                                       const Weights& weights, const RateTriple& triple,
                                       const KKTOptions& opts = {}) {
    require_weights(weights);
    detail::require_kkt_inputs(model, pair);
    if (!(weights.sum() > 0.0))
        throw DegenerateWeights("KKT recovery requires mu1 + mu2 > 0");
    if (triple.scheme != Scheme::SDPC)
        throw std::invalid_argument("recover_kkt_sdpc expects an S-DPC rate triple");
    const bool o12 = triple.order == Order::O12;
    const ChannelModel& m = model;
    const Weights w = o12 ? weights : weights.swapped();
    const CovariancePair p = o12 ? pair : pair.swapped();
    const double r01 = o12 ? triple.r01 : triple.r02;
    const double r02 = o12 ? triple.r02 : triple.r01;
    const detail::PlainCoefficients c{1.0, 1.0 + w.mu1, w.mu1, w.sum()};
    KKTCertificate cert = o12 ? detail::recover12(m, p, c, detail::LambdaMode::Rule, r01, r02, opts)
                              : detail::recover12(swap_users(m), p, c, detail::LambdaMode::Rule,
                                                  r01, r02, opts);
    if (!o12) {
        std::swap(cert.M1, cert.M2);
        cert.lambda = 1.0 - cert.lambda;
    }
    cert.order = triple.order;
    return cert;
}

/// Multipliers for  max mu0' R0 + mu' (R1 + R2)  over the NS-DPC region (order 12), where
/// gamma takes the place of lambda:
///
///   mu' A1 + M1 = mu0' gamma A1 + mu0' (1 - gamma) A2 + MS
///   mu' B2 + M2 = mu' B1 + M1
///
/// gamma is fitted freely in [0, 1]; at an S-DPC optimum it equals (lambda + mu2) / mu0'.
inline KKTCertificate recover_kkt_ns(const ChannelModel& model, const CovariancePair& pair,
                                     double mu0_prime, double mu_prime,
                                     const KKTOptions& opts = {}) {
    detail::require_kkt_inputs(model, pair);
    if (!(mu0_prime > 0.0)) throw DegenerateWeights("NS KKT recovery requires mu0' > 0");
    if (!(mu_prime >= 0.0)) throw DegenerateWeights("NS KKT recovery requires mu' >= 0");
    const auto t = nsdpc_rate_triple(model, pair, Order::O12);
    const detail::PlainCoefficients c{mu0_prime, mu0_prime, mu_prime, mu_prime};
    auto cert = detail::recover12(model, pair, c, detail::LambdaMode::Free, t.r01, t.r02, opts);
    cert.order = Order::O12;
    return cert;
}

}  // namespace mimobc
