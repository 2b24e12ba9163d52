#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "harvest/analytic.hpp"
#include "harvest/payoff.hpp"
#include "harvest/simulate.hpp"
#include "test_util.hpp"

using namespace harvest;
using harvest::test::kind_of;

namespace {

const Example1Params kCase1{0.05, 0.08, 0.3, 0.2, 1.0, 1.0, 0.1};
const Example1Params kCase2{0.05, 0.12, 0.3, 0.2, 1.0, 1.0, 0.1};
const YieldFunction kUnit = YieldFunction::constant({1.0, 1.0});

SimConfig sim(double horizon) {
    SimConfig c;
    c.dt = 1e-3;
    c.horizon = horizon;
    c.stop_when_exhausted = true;
    return c;
}

McConfig mc(std::size_t n, Seed seed, unsigned threads = 1) {
    McConfig m;
    m.n_paths = n;
    m.base_seed = seed;
    m.threads = threads;
    return m;
}

}  // namespace

TEST(PathPayoff, InstantDepletionPaysX) {
    const auto path = simulate_harvested(example_model(kCase1), example_generator(kCase1),
                                         StrategySpec{InstantDepletion{}}, kUnit, 5.0, 0, sim(1.0));
    EXPECT_EQ(path_payoff(path, kUnit, 0.1), 5.0);
}

TEST(PathPayoff, NoHarvestPaysNothing) {
    const auto path = simulate_harvested(example_model(kCase1), example_generator(kCase1), StrategySpec{NoHarvest{}},
                                         kUnit, 5.0, 0, sim(1.0));
    EXPECT_EQ(path_payoff(path, kUnit, 0.1), 0.0);
}

TEST(PathPayoff, SingleDiscountedAtom) {
    HarvestedPath p;
    p.times = {0.0, 1.0};
    p.x = {3.0, 1.0};
    p.regime = {0, 0};
    p.z_cum = {0.0, 2.0};
    p.dz_atom = {0.0, 2.0};
    p.events = {HarvestEvent{1.0, 2.0, 3.0, 0, HarvestKind::Atom}};
    EXPECT_NEAR(path_payoff(p, kUnit, 0.1), 2.0 * std::exp(-0.1), 1e-15);
    EXPECT_NEAR(path_payoff(p, kUnit, 0.1), 1.8097, 1e-4);
}

TEST(PathPayoff, AtomPricedAtLeftLimit) {
    HarvestedPath p;
    p.times = {0.0};
    p.x = {0.0};
    p.regime = {0};
    p.z_cum = {3.0};
    p.dz_atom = {3.0};
    p.events = {HarvestEvent{0.0, 3.0, 3.0, 0, HarvestKind::Atom}};
    EXPECT_DOUBLE_EQ(path_payoff(p, YieldFunction::power_decay(0.5), 0.1), 3.0 * 0.5);
}

TEST(Estimate, CaseTwoAgainstQuadratureOracle) {
    // Independent oracle: int_0^inf e^{-rt} x e^{mu2 t} lambda2 e^{-lambda2 t} dt.
    const double lam = kCase2.lambda2;
    boost::math::quadrature::exp_sinh<double> integrator;
    const double oracle = integrator.integrate(
        [&](double t) { return lam * std::exp((kCase2.mu2 - kCase2.r - lam) * t); });
    EXPECT_NEAR(oracle, 1.0 / 0.98, 1e-10);
    EXPECT_NEAR(example1_value(kCase2, 1.0, 1), oracle, 1e-12);
    const auto e = estimate_J(example_model(kCase2), example_generator(kCase2),
                              StrategySpec{RegimeTriggeredDepletion{{0}}}, kUnit, kCase2.r, 1.0, 1, sim(50.0),
                              mc(40000, 8));
    EXPECT_NEAR(e.mean, oracle, 3.0 * e.std_error);
    EXPECT_LT(e.std_error, 0.01);
}

TEST(Estimate, CaseTwoStartingInTriggerIsExact) {
    const auto e = estimate_J(example_model(kCase2), example_generator(kCase2),
                              StrategySpec{RegimeTriggeredDepletion{{0}}}, kUnit, kCase2.r, 1.0, 0, sim(50.0),
                              mc(500, 8));
    EXPECT_EQ(e.mean, 1.0);
    EXPECT_EQ(e.std_error, 0.0);
}

TEST(Estimate, SinglePathEqualsPathPayoff) {
    const StrategySpec s{Barrier{1.5, 0.0}};
    const auto e = estimate_J(example_model(kCase2), example_generator(kCase2), s, kUnit, kCase2.r, 1.0, 0, sim(5.0),
                              mc(1, 99));
    auto cfg = sim(5.0);
    cfg.seed = mix_seed(99, 0);
    const auto path = simulate_harvested(example_model(kCase2), example_generator(kCase2), s, kUnit, 1.0, 0, cfg);
    EXPECT_EQ(e.mean, path_payoff(path, kUnit, kCase2.r));
    EXPECT_EQ(e.n_paths, 1u);
}

TEST(Estimate, ThreadCountInvariance) {
    const StrategySpec s{Barrier{1.5, 0.0}};
    const auto a = estimate_J(example_model(kCase2), example_generator(kCase2), s, kUnit, kCase2.r, 1.0, 0, sim(5.0),
                              mc(1001, 7, 1));
    const auto b = estimate_J(example_model(kCase2), example_generator(kCase2), s, kUnit, kCase2.r, 1.0, 0, sim(5.0),
                              mc(1001, 7, 3));
    const auto c = estimate_J(example_model(kCase2), example_generator(kCase2), s, kUnit, kCase2.r, 1.0, 0, sim(5.0),
                              mc(1001, 7, 8));
    EXPECT_EQ(estimate_csv_row("s", 1.0, 0, "b", a), estimate_csv_row("s", 1.0, 0, "b", b));
    EXPECT_EQ(estimate_csv_row("s", 1.0, 0, "b", a), estimate_csv_row("s", 1.0, 0, "b", c));
}

TEST(Estimate, AntitheticDoesNotIncreaseVariance) {
    const StrategySpec s{Barrier{1.5, 0.0}};
    auto plain = mc(10000, 4);
    auto anti = plain;
    anti.antithetic = true;
    const auto a = estimate_J(example_model(kCase2), example_generator(kCase2), s, kUnit, kCase2.r, 1.0, 0, sim(5.0),
                              plain);
    const auto b = estimate_J(example_model(kCase2), example_generator(kCase2), s, kUnit, kCase2.r, 1.0, 0, sim(5.0),
                              anti);
    EXPECT_LE(b.std_error, a.std_error * 1.05);
    EXPECT_NEAR(a.mean, b.mean, 3.0 * std::hypot(a.std_error, b.std_error));
}

TEST(Estimate, AntitheticNeedsEvenPathCount) {
    auto m = mc(11, 0);
    m.antithetic = true;
    EXPECT_EQ(kind_of([&] { validate_mc_config(m); }), ErrorKind::InvalidArgument);
    EXPECT_EQ(kind_of([&] { validate_mc_config(mc(0, 0)); }), ErrorKind::InvalidArgument);
}

TEST(Estimate, MonotoneInInitialState) {
    // Best estimate over a family at x dominates f (x - y) + best at y.
    const Example1Params p{0.0, 0.05, 0.3, 0.2, 1.0, 1.0, 0.1};
    const std::vector<StrategySpec> family{StrategySpec{InstantDepletion{}}, StrategySpec{Barrier{1.5, 0.0}},
                                           StrategySpec{Chattering{4, 0.0}}};
    auto best = [&](double x) {
        PayoffEstimate b{-1.0, 0.0, 0, 0.0, 0.0};
        for (const auto& s : family) {
            const auto e = estimate_J(example_model(p), example_generator(p), s, kUnit, p.r, x, 0, sim(5.0), mc(4000, 2));
            if (e.mean > b.mean) b = e;
        }
        return b;
    };
    const auto at_x = best(2.0);
    const auto at_y = best(1.0);
    EXPECT_GE(at_x.mean, 1.0 + at_y.mean - 3.0 * std::hypot(at_x.std_error, at_y.std_error));
}

TEST(Estimate, MultiYieldSharesPaths) {
    const StrategySpec s{Barrier{1.5, 0.0}};
    const std::vector<YieldFunction> fs{kUnit, YieldFunction::power_decay(0.75)};
    const auto both = estimate_J_multi(example_model(kCase2), example_generator(kCase2), s, fs, kCase2.r, 1.0, 0,
                                       sim(5.0), mc(300, 5));
    const auto one = estimate_J(example_model(kCase2), example_generator(kCase2), s, fs[1], kCase2.r, 1.0, 0,
                                sim(5.0), mc(300, 5));
    ASSERT_EQ(both.size(), 2u);
    EXPECT_EQ(both[1].mean, one.mean);
    EXPECT_EQ(both[1].std_error, one.std_error);
}

TEST(TailBound, ZeroWithoutTruncation) {
    EXPECT_EQ(tail_bound(TruncationStats{100, 0, 0.0}, kUnit, 0.1, 10.0, 0.05), 0.0);
}

TEST(TailBound, GeometricSeries) {
    // e^{-rT} * Xbar * sum_k (mu/r)^k-style bound: r / (r - mu).
    const TruncationStats st{100, 10, 25.0};
    const double got = tail_bound(st, kUnit, 0.1, 10.0, 0.05);
    const double xbar = 25.0 / 100.0;
    double series = 0.0;
    for (int k = 0; k < 2000; ++k) series += std::pow(0.05 / 0.1, k);
    EXPECT_NEAR(got, std::exp(-1.0) * xbar * series, 1e-12);
}

TEST(TailBound, UnboundedInCaseThree) {
    const Example1Params p{0.05, 0.2, 0.3, 0.3, 1.0, 1.0, 0.1};
    // A far barrier never exhausts, so every path reaches the horizon alive.
    const auto e = estimate_J(example_model(p), example_generator(p), StrategySpec{Barrier{1e6, 0.0}}, kUnit, p.r, 1.0,
                              0, sim(2.0), mc(50, 1));
    EXPECT_EQ(e.truncated_fraction, 1.0);
    EXPECT_EQ(e.tail_bound, std::numeric_limits<double>::infinity());
    EXPECT_EQ(tail_bound(TruncationStats{10, 1, 1.0}, kUnit, 0.1, 1.0, std::nullopt),
              std::numeric_limits<double>::infinity());
}

TEST(PairwiseSum, MatchesLongDoubleAccumulation) {
    std::vector<double> v;
    long double ref = 0.0L;
    for (int i = 0; i < 10007; ++i) {
        const double x = 1.0 / (1.0 + i) * ((i % 3) ? 1.0 : -0.5);
        v.push_back(x);
        ref += x;
    }
    EXPECT_NEAR(pairwise_sum(v), static_cast<double>(ref), 1e-13);
    EXPECT_EQ(pairwise_sum(std::span<const double>{}), 0.0);
}

TEST(Csv, HeaderAndRow) {
    EXPECT_EQ(estimate_csv_header(), "scenario_id,x0,alpha0,strategy,n_paths,mean,stderr,truncated_fraction,tail_bound");
    const PayoffEstimate e{1.5, 0.25, 10, 0.0, std::numeric_limits<double>::infinity()};
    EXPECT_EQ(estimate_csv_row("a", 2.0, 1, "no_harvest", e), "a,2,2,no_harvest,10,1.5,0.25,0,inf");
}
