#pragma once

#include <array>
#include <string_view>

#include "harvest/ctmc.hpp"
#include "harvest/model.hpp"

namespace harvest {

/// Two-regime GBM with f = 1. Regimes are 0-based here; mu1 <= mu2 by
/// normalization.
struct Example1Params {
    double mu1 = 0.0;
    double mu2 = 0.0;
    double sigma1 = 1.0;
    double sigma2 = 1.0;
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double r = 0.1;
};

/// Throws InvalidArgument unless sigma_i > 0, lambda_i > 0, r > 0, mu1 <= mu2.
void validate(const Example1Params& p);
ModelSpec example_model(const Example1Params& p);
GeneratorMatrix example_generator(const Example1Params& p);

enum class Example1Case { BothSubcritical, Mixed, UnboundedMixed, BothSupercritical };
std::string_view to_string(Example1Case c) noexcept;

/// g(x, a) = int_0^x f(y, a) dy.
double g_integral(const YieldFunction& f, double x, Regime a);

/// (r l1 + (r - mu1)(r + l2)) / (r + l1 - mu1). Throws DegenerateDenominator.
double xi_threshold(const Example1Params& p);

/// Case 1: mu1 <= r, mu2 <= r. Case 2: mu1 < r < mu2 <= xi. Case 3:
/// mu1 < r < xi < mu2. Case 4: mu1 > r, mu2 > r. The edge mu1 = r < mu2
/// throws UnclassifiedBoundary.
Example1Case classify_example1(const Example1Params& p);

/// Closed-form value; +inf in the unbounded cases.
double example1_value(const Example1Params& p, double x, Regime a);
/// Derivative in x of example1_value (finite cases only).
double example1_slope(const Example1Params& p, double x, Regime a);

/// g_i(x) = 1/2 sigma_i^2 x (x - 1) + mu_i x - r - lambda_i.
double gi_eval(const Example1Params& p, Regime i, double x);

/// h(x) = g_1(x) g_2(x) - lambda_1 lambda_2.
double characteristic_h(const Example1Params& p, double x);

struct QuarticRoots {
    std::array<double, 4> beta{};      // descending
    std::array<double, 4> residual{};  // |h(beta_j)|
    std::array<double, 5> coeffs{};    // leading coefficient first
};

/// Companion-matrix eigenvalues polished by Newton. Throws ComplexRoots or
/// OrderingViolation (beta1 > beta2 > 0 > beta3 > beta4, plus beta2 < 1 in
/// Case 3).
QuarticRoots characteristic_roots(const Example1Params& p);

/// Lower bounds on J(x, a, Z) for Z exporting M on entry of [M, inf) x {2}.
struct Case3Bound {
    QuarticRoots roots;
    double l1 = 0.0;
    double l2 = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
    double regime1 = 0.0;
    double regime2 = 0.0;
};
/// Needs 0 < x < M and c in (0, 1]. The bounds increase with c.
Case3Bound case3_lower_bound(const Example1Params& p, double x, double M, double c);

/// Positive root of 1/2 sigma2 x (x - 1) + mu x - r = 0.
double positive_root_p(double mu, double sigma2, double r);

/// Example with yield (1 + x)^-gamma. sigma_i are volatilities.
struct Example2Params {
    Example1Params base;
    double gamma = 0.75;
};

struct Example2Derived {
    double p = 0.0;
    double b = 0.0;
};

/// Checks mu_i > r, equal roots p_1 = p_2 within 1e-10 and 1 - p < gamma < 1
/// (InvalidGamma otherwise).
Example2Derived validate(const Example2Params& p);

/// Two-piece closed form, C^1 at the barrier b = (1 - p) / (p + gamma - 1).
double example2_value(const Example2Params& p, double x);
double example2_slope(const Example2Params& p, double x);
double example2_curvature(const Example2Params& p, double x);

/// x^p / (p b^(p-1)) for 0 < x <= b.
double local_time_mean(double x, double p, double b);

}  // namespace harvest
