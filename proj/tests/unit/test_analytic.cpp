#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "harvest/analytic.hpp"
#include "harvest/model.hpp"
#include "test_util.hpp"

using namespace harvest;
using harvest::test::kind_of;

namespace {

const Example1Params kCase1{0.05, 0.08, 0.3, 0.2, 1.0, 1.0, 0.1};
const Example1Params kCase2{0.05, 0.12, 0.3, 0.2, 1.0, 1.0, 0.1};
const Example1Params kCase3{0.05, 0.2, 0.3, 0.3, 1.0, 1.0, 0.1};
const Example2Params kEx2{{1.0, 1.5, std::sqrt(2.0), 2.0, 1.0, 1.0, 0.25}, 0.75};

double quad(const std::function<double(double)>& fn, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(fn, a, b, 15, 1e-14);
}

// Brute-force roots of h: sign changes on a fine grid, then bisection.
std::vector<double> bracket_roots(const Example1Params& p, double lo, double hi, std::size_t n) {
    std::vector<double> roots;
    auto h = [&](double x) { return characteristic_h(p, x); };
    double x0 = lo;
    double h0 = h(x0);
    for (std::size_t i = 1; i <= n; ++i) {
        const double x1 = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
        const double h1 = h(x1);
        if ((h0 < 0) != (h1 < 0)) {
            double a = x0, b = x1;
            for (int k = 0; k < 200; ++k) {
                const double m = 0.5 * (a + b);
                if ((h(m) < 0) == (h0 < 0)) a = m; else b = m;
            }
            roots.push_back(0.5 * (a + b));
        }
        x0 = x1;
        h0 = h1;
    }
    std::sort(roots.rbegin(), roots.rend());
    return roots;
}

// Roots of 1/2 s^2 x (x - 1) + mu x - r - lambda - shift = 0.
std::array<double, 2> quadratic_roots(double mu, double s, double r, double lambda, double shift) {
    const double a = 0.5 * s * s;
    const double b = mu - 0.5 * s * s;
    const double c = -r - lambda - shift;
    const double d = std::sqrt(b * b - 4 * a * c);
    return {(-b + d) / (2 * a), (-b - d) / (2 * a)};
}

}  // namespace

TEST(GIntegral, Examples) {
    EXPECT_DOUBLE_EQ(g_integral(YieldFunction::constant({1.0, 1.0}), 3.0, 0), 3.0);
    EXPECT_EQ(g_integral(YieldFunction::power_decay(0.75), 0.0, 0), 0.0);
    EXPECT_NEAR(g_integral(YieldFunction::power_decay(0.75), 15.0, 1), 4.0, 1e-14);
}

TEST(GIntegral, MatchesQuadrature) {
    for (const auto& f : {YieldFunction::power_decay(0.75), YieldFunction::power_decay(0.3),
                          YieldFunction::constant({2.0, 0.5})}) {
        for (double x : {1e-6, 0.3, 2.0, 15.0, 100.0}) {
            for (Regime a = 0; a < 2; ++a) {
                const double q = quad([&](double y) { return yield_eval(f, y, a); }, 0.0, x);
                EXPECT_NEAR(g_integral(f, x, a), q, 1e-10 * std::max(1.0, q));
            }
        }
    }
}

TEST(Xi, HandValue) {
    EXPECT_NEAR(xi_threshold(kCase2), 0.155 / 1.05, 1e-15);
    auto p = kCase2;
    p.mu1 = p.r;
    EXPECT_NEAR(xi_threshold(p), p.r, 1e-15);
}

TEST(Classify, Cases) {
    EXPECT_EQ(classify_example1(kCase1), Example1Case::BothSubcritical);
    EXPECT_EQ(classify_example1(kCase2), Example1Case::Mixed);
    EXPECT_EQ(classify_example1(kCase3), Example1Case::UnboundedMixed);
    EXPECT_EQ(classify_example1(Example1Params{0.15, 0.2, 0.3, 0.3, 1.0, 1.0, 0.1}), Example1Case::BothSupercritical);
    EXPECT_EQ(kind_of([] { classify_example1(Example1Params{0.1, 0.2, 0.3, 0.3, 1.0, 1.0, 0.1}); }),
              ErrorKind::UnclassifiedBoundary);
}

TEST(Example1Value, ClosedForms) {
    EXPECT_NEAR(example1_value(kCase2, 1.0, 1), 1.0 / 0.98, 1e-15);
    EXPECT_EQ(example1_value(kCase2, 1.0, 0), 1.0);
    EXPECT_EQ(example1_value(kCase1, 7.0, 0), 7.0);
    EXPECT_EQ(example1_value(kCase3, 1.0, 0), std::numeric_limits<double>::infinity());
}

TEST(Example1Value, CaseTwoRegimeTwoByQuadrature) {
    // E[e^{-r tau} X(tau)] with tau ~ Exp(lambda2) independent of the GBM.
    const double oracle = quad(
        [](double t) { return std::exp((kCase2.mu2 - kCase2.r - kCase2.lambda2) * t) * kCase2.lambda2; }, 0.0, 2000.0);
    EXPECT_NEAR(example1_value(kCase2, 2.5, 1), 2.5 * oracle, 1e-10);
}

TEST(Gi, Examples) {
    EXPECT_DOUBLE_EQ(gi_eval(kCase2, 0, 0.0), -kCase2.r - kCase2.lambda1);
    EXPECT_NEAR(gi_eval(kCase2, 1, 1.0), kCase2.mu2 - kCase2.r - kCase2.lambda2, 1e-15);
    const auto d = validate(kEx2);
    EXPECT_NEAR(gi_eval(kEx2.base, 0, d.p), -kEx2.base.lambda1, 1e-12);
    EXPECT_NEAR(gi_eval(kEx2.base, 1, d.p), -kEx2.base.lambda2, 1e-12);
    EXPECT_NEAR(characteristic_h(kEx2.base, d.p), 0.0, 1e-12);
}

TEST(Roots, CaseThreeAgainstBruteForce) {
    const auto r = characteristic_roots(kCase3);
    const auto bf = bracket_roots(kCase3, -100.0, 100.0, 200000);
    ASSERT_EQ(bf.size(), 4u);
    for (int j = 0; j < 4; ++j) {
        EXPECT_NEAR(r.beta[j], bf[j], 1e-9);
        EXPECT_LT(r.residual[j], 1e-9);
    }
    EXPECT_GT(r.beta[1], 0.0);
    EXPECT_LT(r.beta[1], 1.0);
}

TEST(Roots, WeakCouplingApproachesQuadraticRoots) {
    auto p = kCase3;
    p.lambda1 = 1e-9;
    p.lambda2 = 1e-9;
    const auto r = characteristic_roots(p);
    const auto g1 = quadratic_roots(p.mu1, p.sigma1, p.r, 0.0, 0.0);
    const auto g2 = quadratic_roots(p.mu2, p.sigma2, p.r, 0.0, 0.0);
    std::vector<double> u{g1[0], g1[1], g2[0], g2[1]};
    std::sort(u.rbegin(), u.rend());
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(r.beta[j], u[j], 1e-6);
}

TEST(Roots, SymmetricRegimesFactor) {
    // h = (g - lambda)(g + lambda) when both regimes coincide.
    const Example1Params p{0.07, 0.07, 0.25, 0.25, 0.8, 0.8, 0.1};
    const auto r = characteristic_roots(p);
    const auto outer = quadratic_roots(p.mu1, p.sigma1, p.r, p.lambda1, p.lambda1);
    const auto inner = quadratic_roots(p.mu1, p.sigma1, p.r, p.lambda1, -p.lambda1);
    EXPECT_NEAR(r.beta[0], outer[0], 1e-10);
    EXPECT_NEAR(r.beta[1], inner[0], 1e-10);
    EXPECT_NEAR(r.beta[2], inner[1], 1e-10);
    EXPECT_NEAR(r.beta[3], outer[1], 1e-10);
}

TEST(Roots, RandomCaseThreeDraws) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        Example1Params p;
        p.r = 0.02 + 0.18 * u(rng);
        p.sigma1 = 0.1 + 0.5 * u(rng);
        p.sigma2 = 0.1 + 0.5 * u(rng);
        p.lambda1 = 0.2 + 2.8 * u(rng);
        p.lambda2 = 0.2 + 2.8 * u(rng);
        p.mu1 = p.r - (0.005 + 0.095 * u(rng));
        p.mu2 = xi_threshold(p) + 0.01 + 0.29 * u(rng);
        ASSERT_EQ(classify_example1(p), Example1Case::UnboundedMixed);
        const auto r = characteristic_roots(p);
        EXPECT_GT(r.beta[0], r.beta[1]);
        EXPECT_GT(r.beta[1], 0.0);
        EXPECT_LT(r.beta[1], 1.0);
        EXPECT_GT(0.0, r.beta[2]);
        EXPECT_GT(r.beta[2], r.beta[3]);
        for (double res : r.residual) EXPECT_LT(res, 1e-9);
    }
}

TEST(Case3Bound, BoundaryValuesAtM) {
    const double M = 4.0;
    const double c = 0.3;
    const auto b = case3_lower_bound(kCase3, M * (1.0 - 1e-12), M, c);
    EXPECT_NEAR(b.regime2, M, 1e-9);
    EXPECT_NEAR(b.regime1, c * M, 1e-9);
    // Same identity with the stored constants: l2 C2 M^b2 + l1 C1 M^b1 = 1.
    const auto full = case3_lower_bound(kCase3, 1.0, M, 1.0);
    const double lhs = full.l2 * full.C2 * std::pow(M, full.roots.beta[1]) +
                       full.l1 * full.C1 * std::pow(M, full.roots.beta[0]);
    EXPECT_NEAR(lhs, 1.0, 1e-12);
}

TEST(Case3Bound, GrowsWithMAndVanishesAtZero) {
    double prev = 0.0;
    for (double M : {2.0, 4.0, 8.0, 16.0, 64.0, 256.0}) {
        const auto b = case3_lower_bound(kCase3, 1.0, M, 1e-12);
        EXPECT_GT(b.regime1, prev);
        prev = b.regime1;
    }
    EXPECT_LT(case3_lower_bound(kCase3, 1e-8, 4.0, 0.5).regime1, 1e-6);
}

TEST(Case3Bound, SolvesCoupledEquation) {
    // psi(x, i) = bound / M solves (L - r) psi = 0 on (0, M).
    const double M = 5.0;
    const auto grid = uniform_grid(0.5, 4.5, 400);
    const auto psi = GridFunction::sample(grid, 2, [&](double x, Regime a) {
        const auto b = case3_lower_bound(kCase3, x, M, 0.4);
        return (a == 0 ? b.regime1 : b.regime2) / M;
    });
    const auto out = generator_apply(psi, example_model(kCase3), example_generator(kCase3), kCase3.r);
    EXPECT_LT(out.values.cwiseAbs().maxCoeff(), 1e-4);
}

TEST(PositiveRoot, ExampleTwoExponents) {
    EXPECT_NEAR(positive_root_p(1.0, 2.0, 0.25), 0.5, 1e-15);
    EXPECT_NEAR(positive_root_p(1.5, 4.0, 0.25), 0.5, 1e-15);
    for (double mu : {-0.3, 0.0, 0.2, 2.0}) {
        const double s2 = 0.7;
        const double p = positive_root_p(mu, s2, 0.1);
        EXPECT_GT(p, 0.0);
        EXPECT_NEAR(0.5 * s2 * p * (p - 1) + mu * p - 0.1, 0.0, 1e-12);
    }
}

TEST(Example2, DerivedConstants) {
    const auto d = validate(kEx2);
    EXPECT_NEAR(d.p, 0.5, 1e-15);
    EXPECT_NEAR(d.b, 2.0, 1e-14);
}

TEST(Example2, ValueAtBarrierAndSmoothPasting) {
    const double b = 2.0;
    EXPECT_NEAR(example2_value(kEx2, b), 4.0 * std::pow(3.0, -0.75), 1e-14);
    const double f_b = std::pow(3.0, -0.75);
    EXPECT_NEAR(example2_slope(kEx2, b * (1 - 1e-12)), f_b, 1e-10);
    EXPECT_NEAR(example2_slope(kEx2, b * (1 + 1e-12)), f_b, 1e-10);
    EXPECT_NEAR(example2_curvature(kEx2, b * (1 - 1e-12)), example2_curvature(kEx2, b * (1 + 1e-12)), 1e-9);
    EXPECT_LT(example2_value(kEx2, 1e-12), 1e-5);
}

TEST(Example2, ValueAtOne) {
    EXPECT_NEAR(example2_value(kEx2, 1.0), std::pow(3.0, -0.75) * 2.0 * std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(example2_value(kEx2, 1.0), 1.2408064788027995, 1e-12);
}

TEST(Example2, ValueAboveBarrierIsIncomePlusValue) {
    // phi(x) = phi(b) + int_b^x (1 + y)^-gamma dy for x >= b.
    for (double x : {2.5, 5.0, 20.0}) {
        const double inc = g_integral(YieldFunction::power_decay(0.75), x, 0) -
                           g_integral(YieldFunction::power_decay(0.75), 2.0, 0);
        EXPECT_NEAR(example2_value(kEx2, x), example2_value(kEx2, 2.0) + inc, 1e-12);
    }
}

TEST(Example2, Rejections) {
    auto bad = kEx2;
    bad.gamma = 0.4;
    EXPECT_EQ(kind_of([&] { validate(bad); }), ErrorKind::InvalidGamma);
    bad = kEx2;
    bad.base.mu2 = 1.4;
    EXPECT_EQ(kind_of([&] { validate(bad); }), ErrorKind::InvalidArgument);
}

TEST(LocalTime, Examples) {
    EXPECT_NEAR(local_time_mean(2.0, 0.5, 2.0), 4.0, 1e-14);
    EXPECT_NEAR(local_time_mean(1.0, 0.5, 2.0), 2.0 * std::sqrt(2.0), 1e-14);
    EXPECT_LT(local_time_mean(1e-12, 0.5, 2.0), 1e-5);
}
