#include <gtest/gtest.h>

#include <cmath>

#include "harvest/analytic.hpp"
#include "harvest/model.hpp"
#include "test_util.hpp"

using namespace harvest;
using harvest::test::kind_of;

TEST(Coefficients, GbmDrift) {
    const auto m = ModelSpec::gbm({0.05, 0.12}, {0.3, 0.2});
    EXPECT_DOUBLE_EQ(drift(m, 2.0, 0), 0.10);
    EXPECT_DOUBLE_EQ(drift(m, 0.0, 1), 0.0);
}

TEST(Coefficients, AbmDriftIsConstant) {
    const auto m = ModelSpec::abm({-1.0, 3.0}, {1.0, 2.0});
    EXPECT_DOUBLE_EQ(drift(m, 17.0, 1), 3.0);
    EXPECT_DOUBLE_EQ(diffusion(m, -5.0, 0), 1.0);
}

TEST(Coefficients, GbmDiffusion) {
    const auto m = ModelSpec::gbm({0.05, 0.12}, {0.3, 0.2});
    EXPECT_DOUBLE_EQ(diffusion(m, 10.0, 1), 2.0);
    EXPECT_DOUBLE_EQ(diffusion(m, 0.0, 0), 0.0);
}

TEST(Coefficients, Kappa0IsLinearGrowthConstant) {
    EXPECT_DOUBLE_EQ(*ModelSpec::gbm({0.05, -0.5}, {0.3, 0.2}).kappa0(), 0.7);
    EXPECT_DOUBLE_EQ(*ModelSpec::abm({-1.0, 3.0}, {1.0, 2.0}).kappa0(), 5.0);
    const auto t = ModelSpec::tabulated(1, [](double x, Regime) { return x; }, [](double, Regime) { return 1.0; });
    EXPECT_FALSE(t.kappa0().has_value());
    EXPECT_DOUBLE_EQ(*ModelSpec::gbm({0.05, 0.12}, {0.3, 0.2}).max_growth_rate(), 0.12);
}

TEST(Coefficients, RejectsBadShapes) {
    EXPECT_EQ(kind_of([] { ModelSpec::gbm({0.1, 0.2}, {0.3}); }), ErrorKind::DimensionMismatch);
    EXPECT_EQ(kind_of([] { ModelSpec::abm({0.1}, {0.0}); }), ErrorKind::InvalidArgument);
    EXPECT_EQ(kind_of([] { drift(ModelSpec::gbm({0.1}, {0.3}), 1.0, 1); }), ErrorKind::RegimeOutOfRange);
}

TEST(Coefficients, TabulatedTableInterpolatesAndHolds) {
    CoefficientTable tab{{0.0, 1.0, 2.0}, {{0.0, 1.0, 4.0}}, {{1.0, 1.0, 3.0}}};
    const auto m = ModelSpec::tabulated(tab);
    EXPECT_DOUBLE_EQ(drift(m, 0.5, 0), 0.5);
    EXPECT_DOUBLE_EQ(drift(m, 1.5, 0), 2.5);
    EXPECT_DOUBLE_EQ(drift(m, 5.0, 0), 4.0);
    EXPECT_DOUBLE_EQ(diffusion(m, -1.0, 0), 1.0);
}

TEST(Yield, ConstantPerRegime) {
    const auto f = YieldFunction::constant({1.0, 1.0});
    EXPECT_DOUBLE_EQ(yield_eval(f, 123.0, 1), 1.0);
}

TEST(Yield, PowerDecayValues) {
    EXPECT_DOUBLE_EQ(yield_eval(YieldFunction::power_decay(0.75), 0.0, 0), 1.0);
    EXPECT_DOUBLE_EQ(yield_eval(YieldFunction::power_decay(0.5), 3.0, 1), 0.5);
    EXPECT_DOUBLE_EQ(YieldFunction::power_decay(0.5).sup(), 1.0);
    EXPECT_DOUBLE_EQ(YieldFunction::constant({0.5, 2.0}).sup(), 2.0);
}

TEST(Yield, NegativeStateRejected) {
    EXPECT_EQ(kind_of([] { yield_eval(YieldFunction::power_decay(0.75), -1.0, 0); }), ErrorKind::NegativePopulation);
}

TEST(Yield, NonincreasingAndPositiveAtZero) {
    for (const auto& f : {YieldFunction::power_decay(0.3), YieldFunction::constant({2.0, 0.5})}) {
        for (Regime a = 0; a < 2; ++a) {
            EXPECT_GT(yield_eval(f, 0.0, a), 0.0);
            double prev = yield_eval(f, 0.0, a);
            for (double x = 0.1; x < 50.0; x *= 1.3) {
                const double v = yield_eval(f, x, a);
                EXPECT_LE(v, prev);
                prev = v;
            }
        }
    }
}

TEST(Grid, UniformGridEndpoints) {
    const auto g = uniform_grid(0.5, 2.5, 5);
    ASSERT_EQ(g.size(), 5u);
    EXPECT_DOUBLE_EQ(g.front(), 0.5);
    EXPECT_DOUBLE_EQ(g[2], 1.5);
    EXPECT_DOUBLE_EQ(g.back(), 2.5);
}

TEST(Grid, DerivativesExactOnQuadratic) {
    const auto h = GridFunction::sample(uniform_grid(0.1, 3.0, 40), 1, [](double x, Regime) { return x * x; });
    const auto d = differentiate(h);
    for (std::size_t i = 0; i < h.points(); ++i) {
        EXPECT_NEAR(d.first(0, static_cast<Eigen::Index>(i)), 2.0 * h.grid[i], 1e-8);
        EXPECT_NEAR(d.second(0, static_cast<Eigen::Index>(i)), 2.0, 1e-8);
    }
}

TEST(Grid, DerivativesSecondOrderOnNonuniformGrid) {
    auto err = [](std::size_t n) {
        std::vector<double> g;
        for (std::size_t i = 0; i < n; ++i) {
            const double u = static_cast<double>(i) / static_cast<double>(n - 1);
            g.push_back(0.5 + 2.0 * u * u + u);
        }
        const auto h = GridFunction::sample(g, 1, [](double x, Regime) { return std::sin(x); });
        const auto d = differentiate(h);
        double e = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            e = std::max(e, std::abs(d.second(0, static_cast<Eigen::Index>(i)) + std::sin(g[i])));
        }
        return e;
    };
    const double e1 = err(100);
    const double e2 = err(200);
    EXPECT_GT(std::log2(e1 / e2), 1.7);
}

TEST(Grid, TooSmall) {
    const auto h = GridFunction::sample(uniform_grid(0.1, 1.0, 4), 1, [](double x, Regime) { return x; });
    EXPECT_EQ(kind_of([&] { differentiate(h); }), ErrorKind::GridTooSmall);
}

TEST(GeneratorApply, LinearFunctionCaseOne) {
    const Example1Params p{0.05, 0.08, 0.3, 0.2, 1.0, 1.0, 0.1};
    const auto h = GridFunction::sample(uniform_grid(0.1, 5.0, 50), 2, [](double x, Regime) { return x; });
    const auto out = generator_apply(h, example_model(p), example_generator(p), p.r);
    for (std::size_t i = 0; i < h.points(); ++i) {
        EXPECT_NEAR(out.values(0, static_cast<Eigen::Index>(i)), (p.mu1 - p.r) * h.grid[i], 1e-10);
        EXPECT_NEAR(out.values(1, static_cast<Eigen::Index>(i)), (p.mu2 - p.r) * h.grid[i], 1e-10);
    }
}

TEST(GeneratorApply, ZeroFunction) {
    const Example1Params p{0.05, 0.08, 0.3, 0.2, 1.0, 1.0, 0.1};
    const auto h = GridFunction::sample(uniform_grid(0.1, 5.0, 20), 2, [](double, Regime) { return 0.0; });
    const auto out = generator_apply(h, example_model(p), example_generator(p), p.r);
    EXPECT_EQ(out.values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(GeneratorApply, SwitchingSumVanishesForRegimeFreeFunction) {
    Eigen::MatrixXd rates(3, 3);
    rates << -2, 1, 1, 0.5, -1, 0.5, 3, 1, -4;
    const auto q = validate_generator(rates);
    const auto m = ModelSpec::abm({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
    const auto h = GridFunction::sample(uniform_grid(0.1, 5.0, 30), 3, [](double x, Regime) { return x; });
    const auto out = generator_apply(h, m, q, 0.0);
    EXPECT_LT(out.values.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GeneratorApply, PowerSolutionOfExampleTwo) {
    // p1 = p2 = 1/2 for these parameters, so (L - r) x^p = 0 up to grid truncation.
    const Example1Params p{1.0, 1.5, std::sqrt(2.0), 2.0, 1.0, 1.0, 0.25};
    auto worst = [&](std::size_t n) {
        const auto h = GridFunction::sample(uniform_grid(1.0, 10.0, n), 2, [](double x, Regime) { return std::sqrt(x); });
        return generator_apply(h, example_model(p), example_generator(p), p.r).values.cwiseAbs().maxCoeff();
    };
    const double e1 = worst(200);
    const double e2 = worst(400);
    EXPECT_LT(e2, 1e-3);
    EXPECT_GT(std::log2(e1 / e2), 1.7);
}

TEST(GeneratorApply, Linearity) {
    const Example1Params p{0.05, 0.12, 0.3, 0.2, 1.0, 2.0, 0.1};
    const auto model = example_model(p);
    const auto q = example_generator(p);
    const auto grid = uniform_grid(0.2, 4.0, 60);
    const auto h1 = GridFunction::sample(grid, 2, [](double x, Regime a) { return std::exp(-x) + a; });
    const auto h2 = GridFunction::sample(grid, 2, [](double x, Regime a) { return x * x * (1.0 + a); });
    GridFunction combo = h1;
    combo.values = 2.5 * h1.values + h2.values;
    const auto lhs = generator_apply(combo, model, q, p.r).values;
    const Eigen::MatrixXd rhs = 2.5 * generator_apply(h1, model, q, p.r).values + generator_apply(h2, model, q, p.r).values;
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(GeneratorApply, ExactSlopesReplaceFirstDifferences) {
    const auto model = ModelSpec::gbm({0.3}, {0.0});
    const auto q = validate_generator(Eigen::MatrixXd::Zero(1, 1));
    auto h = GridFunction::sample(uniform_grid(0.1, 2.0, 10), 1, [](double x, Regime) { return std::exp(x); });
    h.slopes = h.values;
    const auto out = generator_apply(h, model, q, 0.0);
    for (std::size_t i = 0; i < h.points(); ++i) {
        EXPECT_NEAR(out.values(0, static_cast<Eigen::Index>(i)), 0.3 * h.grid[i] * std::exp(h.grid[i]), 1e-12);
    }
}

TEST(Lipschitz, GbmUnitCoefficients) {
    const auto rep = lipschitz_probe(ModelSpec::gbm({1.0}, {1.0}), 0.0, 10.0, 101);
    EXPECT_LE(rep.max_difference_ratio, 2.0 + 1e-9);
    EXPECT_LE(rep.max_growth_ratio, 2.0 + 1e-9);
}

TEST(Lipschitz, AbmDriftRatioZero) {
    const auto rep = lipschitz_probe(ModelSpec::abm({-1.0, 3.0}, {1.0, 2.0}), 0.0, 10.0, 50);
    EXPECT_EQ(rep.max_drift_ratio, 0.0);
}

TEST(Lipschitz, SqrtDriftRatioGrowsAsSpacingShrinks) {
    const auto m = ModelSpec::tabulated(1, [](double x, Regime) { return std::sqrt(x); }, [](double, Regime) { return 1.0; });
    const auto coarse = lipschitz_probe(m, 0.0, 1.0, 11);
    const auto fine = lipschitz_probe(m, 0.0, 1.0, 1001);
    EXPECT_GT(fine.max_drift_ratio, 5.0 * coarse.max_drift_ratio);
}
