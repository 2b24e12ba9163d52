#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "harvest/ctmc.hpp"
#include "harvest/error.hpp"
#include "test_util.hpp"

using namespace harvest;
using harvest::test::kind_of;

namespace {

// Stationary distribution from pi Q = 0, sum pi = 1 by a direct linear solve.
Eigen::VectorXd stationary(const Eigen::MatrixXd& q) {
    const auto m = q.rows();
    Eigen::MatrixXd a = q.transpose();
    a.row(m - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    rhs(m - 1) = 1.0;
    return a.fullPivLu().solve(rhs);
}

Eigen::VectorXd occupation(const GeneratorMatrix& q, double horizon, Seed seed) {
    const auto path = simulate_chain(q, 0, horizon, seed);
    Eigen::VectorXd occ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(q.size()));
    double t = 0.0;
    for (std::size_t k = 0; k <= path.jump_times.size(); ++k) {
        const double end = k < path.jump_times.size() ? path.jump_times[k] : horizon;
        occ(static_cast<Eigen::Index>(path.regimes[k])) += end - t;
        t = end;
    }
    return occ / horizon;
}

}  // namespace

TEST(Generator, SymmetricTwoStateIsValid) {
    Eigen::MatrixXd m(2, 2);
    m << -1, 1, 1, -1;
    const auto q = validate_generator(m);
    EXPECT_EQ(q.size(), 2u);
    EXPECT_DOUBLE_EQ(q.exit_rate(0), 1.0);
}

TEST(Generator, RowSumTooLarge) {
    Eigen::MatrixXd m(2, 2);
    m << -1, 2, 1, -1;
    EXPECT_EQ(kind_of([&] { validate_generator(m); }), ErrorKind::RowSumTooLarge);
}

TEST(Generator, NegativeOffDiagonal) {
    Eigen::MatrixXd m(2, 2);
    m << 1, -1, 1, -1;
    EXPECT_EQ(kind_of([&] { validate_generator(m); }), ErrorKind::NegativeOffDiagonal);
}

TEST(Generator, ZeroDiagonalWithTwoRegimesRejected) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
    EXPECT_EQ(kind_of([&] { validate_generator(m); }), ErrorKind::NonAbsorbingRowViolation);
}

TEST(Generator, RowNoiseFoldedOntoDiagonal) {
    const auto q = validate_generator(std::vector<std::vector<double>>{{-1.0, 1.0 + 5e-10}, {2.0, -2.0}});
    EXPECT_NEAR(q.rate(0, 0) + q.rate(0, 1), 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(q.rate(0, 1), 1.0 + 5e-10);
}

TEST(Generator, TwoStateFromRates) {
    const auto q = two_state_generator(1.5, 0.5);
    EXPECT_DOUBLE_EQ(q.rate(0, 1), 1.5);
    EXPECT_DOUBLE_EQ(q.rate(1, 0), 0.5);
    EXPECT_DOUBLE_EQ(q.rate(1, 1), -0.5);
}

TEST(Generator, SingleRegimeAllowed) {
    const auto q = validate_generator(Eigen::MatrixXd::Zero(1, 1));
    const auto path = simulate_chain(q, 0, 10.0, 3);
    EXPECT_TRUE(path.jump_times.empty());
    EXPECT_EQ(path.regimes.size(), 1u);
}

TEST(Chain, MeanHoldingTime) {
    const auto q = two_state_generator(1.0, 1.0);
    const auto path = simulate_chain(q, 0, 1.0e5, 11);
    ASSERT_GT(path.jump_times.size(), 90000u);
    const double mean = path.jump_times.back() / static_cast<double>(path.jump_times.size());
    // 1e5 Exp(1) sojourns: sd of the mean is about 0.003.
    EXPECT_NEAR(mean, 1.0, 0.01);
}

TEST(Chain, SojournMeansPerState) {
    Eigen::MatrixXd m(3, 3);
    m << -2, 1, 1, 0.5, -1, 0.5, 3, 1, -4;
    const auto q = validate_generator(m);
    const auto path = simulate_chain(q, 0, 2.0e5, 5);
    std::vector<double> total(3, 0.0);
    std::vector<double> count(3, 0.0);
    double t = 0.0;
    for (std::size_t k = 0; k < path.jump_times.size(); ++k) {
        total[path.regimes[k]] += path.jump_times[k] - t;
        count[path.regimes[k]] += 1.0;
        t = path.jump_times[k];
    }
    for (Regime i = 0; i < 3; ++i) {
        const double expect = 1.0 / q.exit_rate(i);
        const double se = expect / std::sqrt(count[i]);
        EXPECT_NEAR(total[i] / count[i], expect, 3.0 * se) << "regime " << i;
    }
}

TEST(Chain, OccupationMatchesStationary) {
    Eigen::MatrixXd m(2, 2);
    m << -2, 2, 1, -1;
    const auto q = validate_generator(m);
    const auto pi = stationary(m);
    EXPECT_NEAR(pi(0), 1.0 / 3.0, 1e-12);
    const auto occ = occupation(q, 1.0e5, 17);
    EXPECT_NEAR(occ(0), pi(0), 0.01);
}

TEST(Chain, OccupationMatchesStationaryFourStates) {
    Eigen::MatrixXd m(4, 4);
    m << -1.0, 0.5, 0.25, 0.25, 0.2, -0.6, 0.4, 0.0, 1.0, 1.0, -3.0, 1.0, 0.0, 0.5, 0.5, -1.0;
    const auto q = validate_generator(m);
    const auto pi = stationary(m);
    const auto occ = occupation(q, 2.0e5, 23);
    for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(occ(i), pi(i), 0.01) << "regime " << i;
}

TEST(Chain, ConsecutiveRegimesDifferAndTimesBounded) {
    Eigen::MatrixXd m(3, 3);
    m << -2, 1, 1, 0.5, -1, 0.5, 3, 1, -4;
    const auto path = simulate_chain(validate_generator(m), 2, 50.0, 9);
    for (std::size_t k = 0; k + 1 < path.regimes.size(); ++k) EXPECT_NE(path.regimes[k], path.regimes[k + 1]);
    for (std::size_t k = 0; k < path.jump_times.size(); ++k) {
        EXPECT_LE(path.jump_times[k], 50.0);
        EXPECT_GT(path.jump_times[k], k == 0 ? 0.0 : path.jump_times[k - 1]);
    }
    EXPECT_EQ(path.initial(), 2u);
}

TEST(Chain, SeedDeterminism) {
    const auto q = two_state_generator(1.0, 2.0);
    EXPECT_EQ(simulate_chain(q, 0, 100.0, 42), simulate_chain(q, 0, 100.0, 42));
    EXPECT_NE(simulate_chain(q, 0, 100.0, 42), simulate_chain(q, 0, 100.0, 43));
}

TEST(Chain, InitialRegimeOutOfRange) {
    EXPECT_EQ(kind_of([] { simulate_chain(two_state_generator(1, 1), 2, 1.0, 0); }), ErrorKind::RegimeOutOfRange);
}

TEST(RegimeAt, NoJumps) {
    RegimePath p{{}, {1}, 1.0};
    EXPECT_EQ(regime_at(p, 0.5), 1u);
}

TEST(RegimeAt, CadlagConvention) {
    RegimePath p{{1.0}, {0, 1}, 2.0};
    EXPECT_EQ(regime_at(p, 1.0), 1u);
    EXPECT_EQ(regime_at(p, 1.0, true), 0u);
    EXPECT_EQ(regime_at(p, 0.999), 0u);
}

TEST(RegimeAt, OutOfRange) {
    RegimePath p{{}, {0}, 1.0};
    EXPECT_EQ(kind_of([&] { regime_at(p, 1.5); }), ErrorKind::TimeOutOfRange);
    EXPECT_EQ(kind_of([&] { regime_at(p, -0.1); }), ErrorKind::TimeOutOfRange);
}
