#include "mimobc/channel.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace mimobc;

namespace {

Matrix diag(std::initializer_list<double> v) {
    Vector d(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) d(i++) = x;
    return d.asDiagonal();
}

ChannelModel raw_aligned(const Matrix& s1, const Matrix& s2, const Matrix& s) {
    ChannelModel m;
    m.t = static_cast<int>(s.rows());
    m.user1 = {Matrix::Identity(m.t, m.t), s1};
    m.user2 = {Matrix::Identity(m.t, m.t), s2};
    m.S = s;
    return m;
}

bool mentions(const ValidationReport& r, const std::string& needle) {
    for (const auto& p : r.problems)
        if (p.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST(Validate, AlignedInstanceIsValid) {
    const Matrix eye = Matrix::Identity(2, 2);
    const auto rep = validate_channel(raw_aligned(eye, 2 * eye, eye));
    EXPECT_TRUE(rep.valid()) << rep.summary();
    EXPECT_TRUE(rep.aligned);
}

TEST(Validate, ZeroNoiseIsReported) {
    const Matrix eye = Matrix::Identity(2, 2);
    const auto rep = validate_channel(raw_aligned(eye, Matrix::Zero(2, 2), eye));
    EXPECT_FALSE(rep.valid());
    EXPECT_TRUE(mentions(rep, "Sigma_2 not strictly positive-definite")) << rep.summary();
}

TEST(Validate, DimensionMismatchIsReported) {
    ChannelModel m;
    m.t = 3;
    m.user1 = {Matrix::Ones(1, 2), Matrix::Identity(1, 1)};
    m.user2 = {Matrix::Identity(3, 3), Matrix::Identity(3, 3)};
    m.S = Matrix::Identity(3, 3);
    const auto rep = validate_channel(m);
    EXPECT_FALSE(rep.valid());
    EXPECT_TRUE(mentions(rep, "dimension mismatch")) << rep.summary();
    EXPECT_FALSE(rep.aligned);
}

TEST(Validate, ReportsEveryProblem) {
    Matrix asym(2, 2);
    asym << 1, 0.5, 0, 1;
    const auto rep = validate_channel(raw_aligned(asym, -Matrix::Identity(2, 2), -Matrix::Identity(2, 2)));
    EXPECT_TRUE(mentions(rep, "Sigma_1 not symmetric"));
    EXPECT_TRUE(mentions(rep, "Sigma_2 not strictly positive-definite"));
    EXPECT_TRUE(mentions(rep, "S not positive semi-definite"));
}

TEST(Validate, GeneralGainIsNotAligned) {
    ChannelModel m;
    m.t = 2;
    m.user1 = {Matrix::Ones(1, 2), Matrix::Identity(1, 1)};
    m.user2 = {Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
    m.S = Matrix::Identity(2, 2);
    const auto rep = validate_channel(m);
    EXPECT_TRUE(rep.valid()) << rep.summary();
    EXPECT_FALSE(rep.aligned);
}

TEST(Validate, MakeChannelThrowsOnInvalid) {
    const Matrix eye = Matrix::Identity(2, 2);
    EXPECT_THROW(make_channel(raw_aligned(eye, Matrix::Zero(2, 2), eye)), InvalidInstance);
    EXPECT_TRUE(make_channel(raw_aligned(eye, eye, eye)).aligned);
}

TEST(Validate, SingularSIsAccepted) {
    const Matrix eye = Matrix::Identity(2, 2);
    EXPECT_TRUE(validate_channel(raw_aligned(eye, eye, diag({1, 0}))).valid());
    EXPECT_FALSE(s_strictly_pd(make_aligned(eye, eye, diag({1, 0}))));
}

TEST(Loewner, Examples) {
    const Matrix eye = Matrix::Identity(2, 2);
    EXPECT_TRUE(loewner_leq(eye, 2 * eye, 1e-9));
    EXPECT_FALSE(loewner_leq(diag({1, 3}), diag({2, 2}), 1e-9));
    const Matrix a = diag({0.3, 2.0});
    EXPECT_TRUE(loewner_leq(a, a, 1e-9));
}

TEST(Loewner, DimensionMismatchThrows) {
    EXPECT_THROW(loewner_leq(Matrix::Identity(2, 2), Matrix::Identity(3, 3)), DimensionError);
}

TEST(Loewner, AntisymmetryAndTransitivity) {
    std::mt19937_64 g(11);
    const double tol = 1e-9;
    for (int k = 0; k < 200; ++k) {
        const Matrix a = fixtures::random_pd(g, 3, 0.1, 1.0);
        const Matrix b = a + fixtures::random_pd(g, 3, 0.0, 0.5);
        const Matrix c = b + fixtures::random_pd(g, 3, 0.0, 0.5);
        ASSERT_TRUE(loewner_leq(a, b, tol));
        ASSERT_TRUE(loewner_leq(b, c, tol));
        EXPECT_TRUE(loewner_leq(a, c, 2 * tol));
        if (loewner_leq(b, a, tol)) {
            EXPECT_LE((a - b).norm(), 1e-6);
        }
    }
}

TEST(PsdProject, ClipsNegativeEigenvalues) {
    const Matrix p = psd_project(diag({1, -0.5}));
    EXPECT_LE((p - diag({1, 0})).norm(), 1e-15);
}

TEST(PsdProject, SymmetrizesFirst) {
    Matrix a(2, 2);
    a << 1, 1, 0, 1;
    Matrix expected(2, 2);
    expected << 1, 0.5, 0.5, 1;
    EXPECT_LE((psd_project(a) - expected).norm(), 1e-14);
}

TEST(PsdProject, IdempotentAndPsd) {
    std::mt19937_64 g(3);
    std::normal_distribution<double> nd;
    for (int k = 0; k < 100; ++k) {
        Matrix a(4, 4);
        for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = nd(g);
        const Matrix p = psd_project(a);
        EXPECT_LE(asymmetry(p), 1e-15);
        EXPECT_GE(min_eigenvalue(p), -1e-12);
        EXPECT_LE((psd_project(p) - p).norm(), 1e-12 * std::max(1.0, p.norm()));
        const Matrix pd = fixtures::random_pd(g, 4, 0.1, 2.0);
        EXPECT_LE((psd_project(pd) - pd).norm(), 1e-13);
    }
}

TEST(PsdProject, NonSquareThrows) {
    EXPECT_THROW(psd_project(Matrix::Ones(2, 3)), DimensionError);
}

TEST(LogDet, RejectsSingular) {
    EXPECT_THROW(logdet_pd(diag({1, 0})), NotPositiveDefinite);
    EXPECT_THROW(inverse_pd(diag({1, 1e-13})), NotPositiveDefinite);
    EXPECT_NEAR(logdet_pd(diag({2, 3})), std::log(6.0), 1e-15);
}

TEST(Pair, Feasibility) {
    const auto m = make_aligned(Matrix::Identity(2, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2));
    EXPECT_TRUE(pair_feasible(m, {0.5 * Matrix::Identity(2, 2), 0.5 * Matrix::Identity(2, 2)}));
    EXPECT_FALSE(pair_feasible(m, {0.6 * Matrix::Identity(2, 2), 0.5 * Matrix::Identity(2, 2)}));
    EXPECT_FALSE(pair_feasible(m, {diag({-0.1, 0}), Matrix::Zero(2, 2)}));
    EXPECT_THROW(require_feasible(m, {Matrix::Identity(2, 2), Matrix::Identity(2, 2)}), ConstraintError);
}

TEST(Pair, RandomPairsSatisfyConstraint) {
    std::mt19937_64 g(5);
    for (int k = 0; k < 100; ++k) {
        const auto m = fixtures::random_aligned(g, 3);
        const auto p = fixtures::random_pair(g, m.S);
        EXPECT_TRUE(loewner_leq(p.K1 + p.K2, m.S));
    }
}

TEST(Weights, RejectNegative) {
    EXPECT_THROW(require_weights({-1, 0}), std::invalid_argument);
    EXPECT_NO_THROW(require_weights({0, 2}));
}
