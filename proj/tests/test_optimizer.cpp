#include "mimobc/optimizer.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace mimobc;

namespace {

double half_log2(double x) { return 0.5 * std::log2(x); }

// Closed-form optimum of the degraded scalar instance (sigma1 = 1, sigma2 = 2, s = 1), order 12:
// k2* = 0 and k1* = mu1 - 1 clipped to [0, 1].
double scalar_optimum(double mu1) {
    const double k = std::clamp(mu1 - 1.0, 0.0, 1.0);
    return half_log2(3.0 / (k + 2.0)) + mu1 * half_log2(2.0 * (k + 1.0) / (k + 2.0));
}

}  // namespace

TEST(MaximizeWeighted, ZeroWeightsKeepAllPowerCommon) {
    std::mt19937_64 g(1);
    const auto m = fixtures::random_general(g, 2, 2, 3);
    const auto r = maximize_weighted(m, {0, 0}, Scheme::SDPC, Order::O12);
    EXPECT_LE(r.pair.K1.norm() + r.pair.K2.norm(), 1e-6);
    double expected = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= 2; ++j) {
        const auto& u = m.user(j);
        expected = std::min(expected, logdet_to_bits(logdet_pd(u.H * m.S * u.H.transpose() + u.Sigma) -
                                                     logdet_pd(u.Sigma)));
    }
    EXPECT_NEAR(r.objective, expected, 1e-9);
}

TEST(MaximizeWeighted, ScalarClosedForm) {
    const auto m = make_scalar(1.0, 2.0, 1.0);
    for (double mu1 : {0.0, 0.5, 1.0, 1.25, 1.5, 2.0, 3.0})
        for (double mu2 : {0.0, 1.0, 4.0}) {
            const auto r = maximize_weighted(m, {mu1, mu2}, Scheme::SDPC, Order::O12);
            EXPECT_NEAR(r.objective, scalar_optimum(mu1), 1e-9) << mu1 << "," << mu2;
            EXPECT_LE(r.pair.K2(0, 0), 1e-9);
            if (mu1 > 1.05 && mu1 < 1.95) {
                EXPECT_NEAR(r.pair.K1(0, 0), mu1 - 1.0, 1e-6);
            }
        }
}

TEST(MaximizeWeighted, ScalarExampleMatchesOracle) {
    const auto m = make_scalar(1.0, 2.0, 1.0);
    const auto r = maximize_weighted(m, {1, 1}, Scheme::SDPC, Order::O12);
    const auto o = scalar_grid_oracle(m, {1, 1}, Scheme::SDPC, Order::O12, 2001);
    EXPECT_EQ(r.pair.K2(0, 0), 0.0);
    EXPECT_NEAR(r.objective, o.objective, 1e-3);
}

TEST(MaximizeWeighted, IdenticalUsersGiveCommonRateOnly) {
    std::mt19937_64 g(2);
    auto m = fixtures::random_aligned(g);
    m.user2 = m.user1;
    const double base = maximize_weighted(m, {0, 0}, Scheme::SDPC, Order::O12).objective;
    for (Order o : {Order::O12, Order::O21}) {
        const auto r = maximize_weighted(m, {1.5, 0.7}, Scheme::SDPC, o);
        EXPECT_NEAR(r.objective, base, 1e-9);
    }
}

TEST(MaximizeWeighted, ResultInvariants) {
    std::mt19937_64 g(3);
    for (int k = 0; k < 4; ++k) {
        const auto m = k % 2 ? fixtures::random_general(g, 2, 2, 2) : fixtures::random_aligned(g);
        for (Order o : {Order::O12, Order::O21}) {
            const Weights w{0.8, 1.7};
            const auto r = maximize_weighted(m, w, Scheme::SDPC, o);
            EXPECT_TRUE(pair_feasible(m, r.pair));
            EXPECT_NEAR(r.objective, weighted_objective(m, r.pair, w, Scheme::SDPC, o), 1e-10);
            EXPECT_TRUE(r.converged);
            EXPECT_EQ(r.restarts_used, 19);
        }
    }
}

TEST(MaximizeWeighted, DeterministicForSeed) {
    std::mt19937_64 g(4);
    const auto m = fixtures::random_aligned(g);
    OptOptions o;
    o.seed = 99;
    const auto a = maximize_weighted(m, {0.5, 2}, Scheme::SDPC, Order::O21, o);
    const auto b = maximize_weighted(m, {0.5, 2}, Scheme::SDPC, Order::O21, o);
    EXPECT_EQ(a.objective, b.objective);
    EXPECT_EQ((a.pair.K1 - b.pair.K1).norm(), 0.0);
    EXPECT_EQ((a.pair.K2 - b.pair.K2).norm(), 0.0);
    EXPECT_EQ(a.seed, 99u);
}

TEST(MaximizeWeighted, MonotoneInWeights) {
    std::mt19937_64 g(5);
    const auto m = fixtures::random_aligned(g);
    double prev = -1;
    for (double mu : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0}) {
        const double v = maximize_weighted(m, {mu, 0.5}, Scheme::SDPC, Order::O12).objective;
        EXPECT_GE(v, prev - 1e-9);
        prev = v;
    }
}

TEST(MaximizeWeighted, NsdpcScheme) {
    const auto m = make_scalar(1.0, 2.0, 1.0);
    // Private rates: maximize R0 + (R1 + R2) with equal weights; all variants agree across orders.
    const auto a = maximize_weighted(m, {1, 1}, Scheme::NSDPC, Order::O12);
    const auto b = maximize_weighted(m, {1, 1}, Scheme::NSDPC, Order::O21);
    for (Order o : {Order::O12, Order::O21}) {
        const auto oracle = scalar_grid_oracle(m, {1, 1}, Scheme::NSDPC, o, 2001);
        EXPECT_GE((o == Order::O12 ? a : b).objective, oracle.objective - 1e-9);
        EXPECT_NEAR((o == Order::O12 ? a : b).objective, oracle.objective, 1e-3);
    }
    EXPECT_NEAR(a.objective, b.objective, 1e-8);
}

TEST(MaximizeWeighted, Errors) {
    const auto singular = make_aligned(Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                                       Matrix(Vector::Unit(2, 0).asDiagonal()));
    EXPECT_THROW(maximize_weighted(singular, {1, 1}, Scheme::SDPC, Order::O12), InvalidInstance);
    std::mt19937_64 g(6);
    const auto general = fixtures::random_general(g, 2, 2, 2);
    EXPECT_THROW(maximize_weighted(general, {1, 1}, Scheme::NSDPC, Order::O12), UnsupportedConfiguration);
    EXPECT_THROW(maximize_weighted(general, {-1, 1}, Scheme::SDPC, Order::O12), std::invalid_argument);
}

TEST(ScalarOracle, Examples) {
    const auto m = make_scalar(1.0, 2.0, 1.0);
    const auto z = scalar_grid_oracle(m, {0, 0}, Scheme::SDPC, Order::O12, 101);
    EXPECT_EQ(z.pair.K1(0, 0), 0.0);
    EXPECT_EQ(z.pair.K2(0, 0), 0.0);
    const auto o = scalar_grid_oracle(m, {1, 0}, Scheme::SDPC, Order::O12, 2001);
    EXPECT_NEAR(o.objective, maximize_weighted(m, {1, 0}, Scheme::SDPC, Order::O12).objective, 1e-3);
    const auto same = make_scalar(1.5, 1.5, 2.0);
    const auto s = scalar_grid_oracle(same, {2, 3}, Scheme::SDPC, Order::O21, 501);
    EXPECT_NEAR(s.objective, half_log2(1.0 + 2.0 / 1.5), 1e-14);
    EXPECT_EQ(s.pair.K1(0, 0) + s.pair.K2(0, 0), 0.0);
}

TEST(ScalarOracle, AgreesWithClosedForm) {
    const auto m = make_scalar(1.0, 2.0, 1.0);
    for (double mu1 : {0.5, 1.5, 2.5}) {
        const auto o = scalar_grid_oracle(m, {mu1, 1}, Scheme::SDPC, Order::O12, 2001);
        EXPECT_NEAR(o.objective, scalar_optimum(mu1), 1e-6);
    }
}

TEST(ScalarOracle, RejectsNonScalar) {
    std::mt19937_64 g(7);
    EXPECT_THROW(scalar_grid_oracle(fixtures::random_aligned(g), {1, 1}, Scheme::SDPC, Order::O12, 11),
                 UnsupportedConfiguration);
}

TEST(Wiretap, ScalarCapacity) {
    // Degraded scalar wiretap channel: C = 1/2 log2((1 + s/sigma1) / (1 + s/sigma2)).
    for (auto [s1, s2, s] : std::vector<std::array<double, 3>>{{1, 2, 1}, {0.5, 3, 2}, {2, 1, 1}}) {
        const auto m = make_scalar(s1, s2, s);
        const double c = std::max(0.0, half_log2((1 + s / s1) / (1 + s / s2)));
        EXPECT_NEAR(maximize_wiretap(m).secrecy_rate, c, 1e-9);
    }
}
