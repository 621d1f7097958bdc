#pragma once
// Domain types and symmetric-matrix utilities shared by every module.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mimobc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Errors

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionError : Error {
    using Error::Error;
};
/// A covariance pair violates K1, K2 >= 0 or K1 + K2 <= S.
struct ConstraintError : Error {
    using Error::Error;
};
struct UnsupportedConfiguration : Error {
    using Error::Error;
};
struct NotPositiveDefinite : Error {
    using Error::Error;
};
struct DegenerateWeights : Error {
    using Error::Error;
};
struct InvalidInstance : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Tolerances

struct Tolerances {
    double loewner = 1e-9;     // absolute, on eigenvalues
    double symmetry = 1e-8;    // relative Frobenius asymmetry
    double pd_floor = 1e-12;   // min eigenvalue for log-det / inversion
};

inline const Tolerances& default_tolerances() {
    static const Tolerances tol{};
    return tol;
}

// ---------------------------------------------------------------------------
// Symmetric matrix helpers

inline Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

inline double asymmetry(const Matrix& a) {
    const double n = a.norm();
    const double d = (a - a.transpose()).norm();
    return n > 0.0 ? d / n : d;
}

inline Vector sym_eigenvalues(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline double min_eigenvalue(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    return sym_eigenvalues(a).minCoeff();
}

inline double max_eigenvalue(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    return sym_eigenvalues(a).maxCoeff();
}

/// log|A| (natural log) for symmetric PD A. Throws when min eigenvalue < floor.
inline double logdet_pd(const Matrix& a, double floor = default_tolerances().pd_floor) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a), Eigen::EigenvaluesOnly);
    const Vector& ev = es.eigenvalues();
    if (ev.size() > 0 && ev.minCoeff() < floor)
        throw NotPositiveDefinite("log-det argument not positive-definite (min eigenvalue " +
                                  std::to_string(ev.minCoeff()) + ")");
    return ev.array().log().sum();
}

/// Inverse of a symmetric PD matrix via its eigendecomposition.
inline Matrix inverse_pd(const Matrix& a, double floor = default_tolerances().pd_floor) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a));
    const Vector& ev = es.eigenvalues();
    if (ev.size() > 0 && ev.minCoeff() < floor)
        throw NotPositiveDefinite("cannot invert matrix with min eigenvalue " +
                                  std::to_string(ev.minCoeff()));
    const Matrix& v = es.eigenvectors();
    return symmetrize(v * ev.cwiseInverse().asDiagonal() * v.transpose());
}

/// Symmetric PSD square root.
inline Matrix sqrt_psd(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a));
    const Vector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return symmetrize(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose());
}

/// Symmetrize, then clip negative eigenvalues to zero.
inline Matrix psd_project(const Matrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("psd_project: matrix is not square");
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a));
    const Vector ev = es.eigenvalues().cwiseMax(0.0);
    return symmetrize(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose());
}

/// A <= B in the Loewner order: min eigenvalue of (B - A) >= -tol.
inline bool loewner_leq(const Matrix& a, const Matrix& b,
                        double tol = default_tolerances().loewner) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
        throw DimensionError("loewner_leq: dimension mismatch");
    if (a.size() == 0) return true;
    return min_eigenvalue(b - a) >= -tol;
}

inline bool is_psd(const Matrix& a, double tol = default_tolerances().loewner) {
    return loewner_leq(Matrix::Zero(a.rows(), a.cols()), a, tol);
}

// ---------------------------------------------------------------------------
// Domain types

struct UserChannel {
    Matrix H;      // r x t gain
    Matrix Sigma;  // r x r noise covariance
};

/// One problem instance (H1, H2, Sigma1, Sigma2, S).
struct ChannelModel {
    int t = 0;
    UserChannel user1;
    UserChannel user2;
    Matrix S;
    bool aligned = false;  // set by validate_channel
    std::string name;

    const UserChannel& user(int j) const { return j == 1 ? user1 : user2; }
};

struct ValidationReport {
    std::vector<std::string> problems;
    bool aligned = false;

    bool valid() const { return problems.empty(); }
    std::string summary() const {
        std::string s;
        for (const auto& p : problems) {
            if (!s.empty()) s += "; ";
            s += p;
        }
        return s;
    }
};

namespace detail {

inline bool is_identity(const Matrix& m) {
    return m.rows() == m.cols() && (m - Matrix::Identity(m.rows(), m.cols())).norm() == 0.0;
}

inline bool dims_consistent(const ChannelModel& m) {
    if (m.t <= 0 || m.S.rows() != m.t || m.S.cols() != m.t) return false;
    for (int j = 1; j <= 2; ++j) {
        const auto& u = m.user(j);
        if (u.H.cols() != m.t || u.H.rows() <= 0) return false;
        if (u.Sigma.rows() != u.H.rows() || u.Sigma.cols() != u.H.rows()) return false;
    }
    return true;
}

}  // namespace detail

/// Reports every violated invariant; never throws.
inline ValidationReport validate_channel(const ChannelModel& model,
                                         const Tolerances& tol = default_tolerances()) {
    ValidationReport rep;
    if (model.t <= 0) rep.problems.push_back("input dimension t must be positive");
    if (model.S.rows() != model.t || model.S.cols() != model.t)
        rep.problems.push_back("dimension mismatch: S is " + std::to_string(model.S.rows()) + "x" +
                               std::to_string(model.S.cols()) + ", expected " +
                               std::to_string(model.t) + "x" + std::to_string(model.t));
    for (int j = 1; j <= 2; ++j) {
        const auto& u = model.user(j);
        const std::string tag = std::to_string(j);
        if (u.H.cols() != model.t || u.H.rows() <= 0)
            rep.problems.push_back("dimension mismatch: H_" + tag + " is " +
                                   std::to_string(u.H.rows()) + "x" + std::to_string(u.H.cols()) +
                                   " but t = " + std::to_string(model.t));
        if (u.Sigma.rows() != u.Sigma.cols() || u.Sigma.rows() != u.H.rows()) {
            rep.problems.push_back("dimension mismatch: Sigma_" + tag + " is " +
                                   std::to_string(u.Sigma.rows()) + "x" +
                                   std::to_string(u.Sigma.cols()) + " but H_" + tag + " has " +
                                   std::to_string(u.H.rows()) + " rows");
            continue;
        }
        if (u.Sigma.size() == 0) continue;
        if (asymmetry(u.Sigma) > tol.symmetry)
            rep.problems.push_back("Sigma_" + tag + " not symmetric");
        if (min_eigenvalue(u.Sigma) <= 0.0)
            rep.problems.push_back("Sigma_" + tag + " not strictly positive-definite");
    }
    if (model.S.rows() == model.S.cols() && model.S.size() > 0) {
        if (asymmetry(model.S) > tol.symmetry) rep.problems.push_back("S not symmetric");
        if (min_eigenvalue(model.S) < -tol.loewner)
            rep.problems.push_back("S not positive semi-definite");
    }
    rep.aligned = rep.valid() && detail::dims_consistent(model) &&
                  model.user1.H.rows() == model.t && model.user2.H.rows() == model.t &&
                  detail::is_identity(model.user1.H) && detail::is_identity(model.user2.H);
    return rep;
}

/// Validates and returns a copy with the aligned flag set; throws on an invalid model.
inline ChannelModel make_channel(ChannelModel model) {
    const auto rep = validate_channel(model);
    if (!rep.valid()) throw InvalidInstance("invalid channel: " + rep.summary());
    model.aligned = rep.aligned;
    model.S = symmetrize(model.S);
    model.user1.Sigma = symmetrize(model.user1.Sigma);
    model.user2.Sigma = symmetrize(model.user2.Sigma);
    return model;
}

/// Aligned channel H1 = H2 = I.
inline ChannelModel make_aligned(const Matrix& sigma1, const Matrix& sigma2, const Matrix& s,
                                 std::string name = {}) {
    ChannelModel m;
    m.t = static_cast<int>(s.rows());
    m.user1 = {Matrix::Identity(m.t, m.t), sigma1};
    m.user2 = {Matrix::Identity(m.t, m.t), sigma2};
    m.S = s;
    m.name = std::move(name);
    return make_channel(std::move(m));
}

inline ChannelModel make_scalar(double sigma1, double sigma2, double s) {
    return make_aligned(Matrix::Constant(1, 1, sigma1), Matrix::Constant(1, 1, sigma2),
                        Matrix::Constant(1, 1, s));
}

/// Exchanges the roles of the two users.
inline ChannelModel swap_users(ChannelModel m) {
    std::swap(m.user1, m.user2);
    return m;
}

/// S strictly positive-definite (required by the optimizer and extremal checker).
inline bool s_strictly_pd(const ChannelModel& m, double floor = default_tolerances().pd_floor) {
    return min_eigenvalue(m.S) > floor;
}

// ---------------------------------------------------------------------------

struct CovariancePair {
    Matrix K1;
    Matrix K2;

    static CovariancePair zero(int t) { return {Matrix::Zero(t, t), Matrix::Zero(t, t)}; }
    CovariancePair swapped() const { return {K2, K1}; }
};

/// Empty string when feasible, otherwise the first violated constraint.
inline std::string pair_violation(const ChannelModel& m, const CovariancePair& p,
                                  double tol = default_tolerances().loewner) {
    if (p.K1.rows() != m.t || p.K1.cols() != m.t || p.K2.rows() != m.t || p.K2.cols() != m.t)
        return "covariance dimension mismatch";
    if (!is_psd(p.K1, tol)) return "K1 not positive semi-definite";
    if (!is_psd(p.K2, tol)) return "K2 not positive semi-definite";
    if (!loewner_leq(p.K1 + p.K2, m.S, tol)) return "K1 + K2 exceeds S";
    return {};
}

inline bool pair_feasible(const ChannelModel& m, const CovariancePair& p,
                          double tol = default_tolerances().loewner) {
    return pair_violation(m, p, tol).empty();
}

inline void require_feasible(const ChannelModel& m, const CovariancePair& p,
                             double tol = default_tolerances().loewner) {
    const auto v = pair_violation(m, p, tol);
    if (!v.empty()) throw ConstraintError("infeasible covariance pair: " + v);
}

/// Non-negative weights on the confidential rates; the common weight is 1.
struct Weights {
    double mu1 = 0.0;
    double mu2 = 0.0;

    double sum() const { return mu1 + mu2; }
    Weights swapped() const { return {mu2, mu1}; }
};

inline void require_weights(const Weights& w) {
    if (!(w.mu1 >= 0.0) || !(w.mu2 >= 0.0) || !std::isfinite(w.mu1) || !std::isfinite(w.mu2))
        throw std::invalid_argument("weights must be finite and non-negative");
}

}  // namespace mimobc
