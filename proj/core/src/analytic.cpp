#include "harvest/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "harvest/error.hpp"

namespace harvest {

namespace {

double mu_of(const Example1Params& p, Regime i) { return i == 0 ? p.mu1 : p.mu2; }
double sigma_of(const Example1Params& p, Regime i) { return i == 0 ? p.sigma1 : p.sigma2; }
double lambda_of(const Example1Params& p, Regime i) { return i == 0 ? p.lambda1 : p.lambda2; }

void check_regime(Regime a) {
    if (a > 1) throw Error(ErrorKind::RegimeOutOfRange, "the two-regime examples have regimes 1 and 2");
}

std::array<double, 5> quartic_coeffs(const Example1Params& p) {
    // g_i(x) = a_i x^2 + b_i x + c_i
    const double a1 = 0.5 * p.sigma1 * p.sigma1, b1 = p.mu1 - a1, c1 = -p.r - p.lambda1;
    const double a2 = 0.5 * p.sigma2 * p.sigma2, b2 = p.mu2 - a2, c2 = -p.r - p.lambda2;
    return {a1 * a2, a1 * b2 + a2 * b1, a1 * c2 + b1 * b2 + a2 * c1, b1 * c2 + b2 * c1,
            c1 * c2 - p.lambda1 * p.lambda2};
}

// Horner evaluation of the quartic and its derivative in long double.
std::pair<long double, long double> horner(const std::array<double, 5>& c, long double x) {
    long double v = c[0];
    long double d = 0.0L;
    for (std::size_t k = 1; k < 5; ++k) {
        d = d * x + v;
        v = v * x + c[k];
    }
    return {v, d};
}

double polish(const std::array<double, 5>& c, double root) {
    long double x = root;
    long double best = std::abs(horner(c, x).first);
    for (int it = 0; it < 20 && best > 0.0L; ++it) {
        const auto [v, d] = horner(c, x);
        if (d == 0.0L) break;
        const long double next = x - v / d;
        const long double res = std::abs(horner(c, next).first);
        if (!(res < best)) break;
        x = next;
        best = res;
    }
    return static_cast<double>(x);
}

}  // namespace

void validate(const Example1Params& p) {
    if (!(p.sigma1 > 0.0 && p.sigma2 > 0.0)) throw Error(ErrorKind::InvalidArgument, "volatilities must be positive");
    if (!(p.lambda1 > 0.0 && p.lambda2 > 0.0)) throw Error(ErrorKind::InvalidArgument, "switching rates must be positive");
    if (!(p.r > 0.0)) throw Error(ErrorKind::InvalidArgument, "discount rate must be positive");
    if (!(p.mu1 <= p.mu2)) throw Error(ErrorKind::InvalidArgument, "regimes must be ordered so that mu1 <= mu2");
}

ModelSpec example_model(const Example1Params& p) { return ModelSpec::gbm({p.mu1, p.mu2}, {p.sigma1, p.sigma2}); }

GeneratorMatrix example_generator(const Example1Params& p) { return two_state_generator(p.lambda1, p.lambda2); }

std::string_view to_string(Example1Case c) noexcept {
    switch (c) {
        case Example1Case::BothSubcritical: return "BothSubcritical";
        case Example1Case::Mixed: return "Mixed";
        case Example1Case::UnboundedMixed: return "UnboundedMixed";
        case Example1Case::BothSupercritical: return "BothSupercritical";
    }
    return "?";
}

double g_integral(const YieldFunction& f, double x, Regime a) {
    if (x < 0.0) throw Error(ErrorKind::NegativePopulation, "g is defined for x >= 0");
    return std::visit(
        [&](const auto& y) -> double {
            using T = std::decay_t<decltype(y)>;
            if constexpr (std::is_same_v<T, ConstantPerRegimeYield>) {
                if (a >= y.price.size()) throw Error(ErrorKind::RegimeOutOfRange, "regime out of range");
                return y.price[a] * x;
            } else {
                const double k = 1.0 - y.gamma;
                return std::expm1(k * std::log1p(x)) / k;
            }
        },
        f.kind());
}

double xi_threshold(const Example1Params& p) {
    const double den = p.r + p.lambda1 - p.mu1;
    if (std::abs(den) <= 1e-14 * (std::abs(p.r) + std::abs(p.lambda1) + std::abs(p.mu1))) {
        throw Error(ErrorKind::DegenerateDenominator, "r + lambda1 - mu1 vanishes");
    }
    return (p.r * p.lambda1 + (p.r - p.mu1) * (p.r + p.lambda2)) / den;
}

Example1Case classify_example1(const Example1Params& p) {
    validate(p);
    const double r = p.r;
    if (p.mu1 <= r && p.mu2 <= r) return Example1Case::BothSubcritical;
    if (p.mu1 > r && p.mu2 > r) return Example1Case::BothSupercritical;
    if (p.mu1 < r && r < p.mu2) {
        const double xi = xi_threshold(p);
        return p.mu2 <= xi ? Example1Case::Mixed : Example1Case::UnboundedMixed;
    }
    std::ostringstream os;
    os << "mu1 = " << p.mu1 << ", mu2 = " << p.mu2 << ", r = " << r << " sits on an edge no case covers";
    throw Error(ErrorKind::UnclassifiedBoundary, os.str());
}

double example1_value(const Example1Params& p, double x, Regime a) {
    check_regime(a);
    if (!(x > 0.0)) throw Error(ErrorKind::InvalidArgument, "x must be positive");
    switch (classify_example1(p)) {
        case Example1Case::BothSubcritical: return x;
        case Example1Case::Mixed: return a == 0 ? x : p.lambda2 / (p.lambda2 + p.r - p.mu2) * x;
        default: return std::numeric_limits<double>::infinity();
    }
}

double example1_slope(const Example1Params& p, double x, Regime a) {
    const double v = example1_value(p, x, a);
    return v / x;
}

double gi_eval(const Example1Params& p, Regime i, double x) {
    check_regime(i);
    const double s = sigma_of(p, i);
    return 0.5 * s * s * x * (x - 1.0) + mu_of(p, i) * x - p.r - lambda_of(p, i);
}

double characteristic_h(const Example1Params& p, double x) {
    return gi_eval(p, 0, x) * gi_eval(p, 1, x) - p.lambda1 * p.lambda2;
}

QuarticRoots characteristic_roots(const Example1Params& p) {
    if (!(p.sigma1 > 0.0 && p.sigma2 > 0.0)) throw Error(ErrorKind::InvalidArgument, "volatilities must be positive");
    QuarticRoots out;
    out.coeffs = quartic_coeffs(p);
    const auto& c = out.coeffs;

    Eigen::Matrix4d companion = Eigen::Matrix4d::Zero();
    for (int k = 0; k < 4; ++k) companion(0, k) = -c[static_cast<std::size_t>(k + 1)] / c[0];
    for (int k = 1; k < 4; ++k) companion(k, k - 1) = 1.0;
    Eigen::EigenSolver<Eigen::Matrix4d> solver(companion, false);
    if (solver.info() != Eigen::Success) throw Error(ErrorKind::ComplexRoots, "eigenvalue iteration failed");

    for (int k = 0; k < 4; ++k) {
        const std::complex<double> z = solver.eigenvalues()(k);
        if (std::abs(z.imag()) > 1e-7 * (1.0 + std::abs(z))) {
            std::ostringstream os;
            os << "root " << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i is not real";
            throw Error(ErrorKind::ComplexRoots, os.str());
        }
        out.beta[static_cast<std::size_t>(k)] = polish(c, z.real());
    }
    std::sort(out.beta.begin(), out.beta.end(), std::greater<>());
    for (std::size_t k = 0; k < 4; ++k) out.residual[k] = std::abs(characteristic_h(p, out.beta[k]));

    const auto& b = out.beta;
    if (!(b[0] > b[1] && b[1] > 0.0 && 0.0 > b[2] && b[2] > b[3])) {
        std::ostringstream os;
        os << "roots " << b[0] << ", " << b[1] << ", " << b[2] << ", " << b[3] << " break beta1 > beta2 > 0 > beta3 > beta4";
        throw Error(ErrorKind::OrderingViolation, os.str());
    }
    if (p.mu1 < p.r && p.r < p.mu2 && p.mu2 > xi_threshold(p) && !(b[1] < 1.0)) {
        std::ostringstream os;
        os << "beta2 = " << b[1] << " is not below 1 although mu1 < r < xi < mu2";
        throw Error(ErrorKind::OrderingViolation, os.str());
    }
    return out;
}

Case3Bound case3_lower_bound(const Example1Params& p, double x, double M, double c) {
    if (!(x > 0.0 && x < M)) throw Error(ErrorKind::InvalidArgument, "need 0 < x < M");
    if (!(c > 0.0 && c <= 1.0)) throw Error(ErrorKind::InvalidArgument, "boundary value c must lie in (0, 1]");
    Case3Bound out;
    out.roots = characteristic_roots(p);
    const double b1 = out.roots.beta[0];
    const double b2 = out.roots.beta[1];
    out.l1 = -p.lambda2 / gi_eval(p, 1, b1);
    out.l2 = -p.lambda2 / gi_eval(p, 1, b2);
    const double dl = out.l2 - out.l1;
    out.C1 = (out.l2 * c - 1.0) / (dl * std::pow(M, b1));
    out.C2 = (1.0 - out.l1 * c) / (dl * std::pow(M, b2));
    const double t1 = std::pow(x, b1) * std::pow(M, 1.0 - b1);
    const double t2 = std::pow(x, b2) * std::pow(M, 1.0 - b2);
    out.regime1 = (out.l2 * c - 1.0) / dl * t1 + (1.0 - out.l1 * c) / dl * t2;
    out.regime2 = out.l1 * (out.l2 * c - 1.0) / dl * t1 + out.l2 * (1.0 - out.l1 * c) / dl * t2;
    return out;
}

double positive_root_p(double mu, double sigma2, double r) {
    if (!(sigma2 > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma^2 must be positive");
    if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "r must be positive");
    const double a = 0.5 - mu / sigma2;
    const double disc = std::sqrt(a * a + 2.0 * r / sigma2);
    // Rationalized form when a < 0 avoids cancellation.
    const double p = a >= 0.0 ? a + disc : (2.0 * r / sigma2) / (disc - a);
    return p;
}

Example2Derived validate(const Example2Params& p2) {
    const auto& p = p2.base;
    validate(p);
    if (!(p.mu1 > p.r && p.mu2 > p.r)) throw Error(ErrorKind::InvalidArgument, "the example needs mu1 > r and mu2 > r");
    const double pa = positive_root_p(p.mu1, p.sigma1 * p.sigma1, p.r);
    const double pb = positive_root_p(p.mu2, p.sigma2 * p.sigma2, p.r);
    if (std::abs(pa - pb) > 1e-10) {
        std::ostringstream os;
        os << "p1 = " << pa << " and p2 = " << pb << " differ";
        throw Error(ErrorKind::InvalidArgument, os.str());
    }
    Example2Derived d;
    d.p = 0.5 * (pa + pb);
    if (!(p2.gamma > 1.0 - d.p && p2.gamma < 1.0)) {
        std::ostringstream os;
        os << "gamma = " << p2.gamma << " outside (1 - p, 1) = (" << 1.0 - d.p << ", 1)";
        throw Error(ErrorKind::InvalidGamma, os.str());
    }
    d.b = (1.0 - d.p) / (d.p + p2.gamma - 1.0);
    return d;
}

double example2_value(const Example2Params& p2, double x) {
    const auto [p, b] = validate(p2);
    if (!(x > 0.0)) throw Error(ErrorKind::InvalidArgument, "x must be positive");
    const double g = p2.gamma;
    const double fb = std::pow(1.0 + b, -g);
    if (x < b) return fb / (p * std::pow(b, p - 1.0)) * std::pow(x, p);
    const double k = 1.0 - g;
    return (std::pow(1.0 + x, k) - std::pow(1.0 + b, k)) / k + b * fb / p;
}

double example2_slope(const Example2Params& p2, double x) {
    const auto [p, b] = validate(p2);
    if (!(x > 0.0)) throw Error(ErrorKind::InvalidArgument, "x must be positive");
    const double g = p2.gamma;
    if (x < b) return std::pow(1.0 + b, -g) / std::pow(b, p - 1.0) * std::pow(x, p - 1.0);
    return std::pow(1.0 + x, -g);
}

double example2_curvature(const Example2Params& p2, double x) {
    const auto [p, b] = validate(p2);
    if (!(x > 0.0)) throw Error(ErrorKind::InvalidArgument, "x must be positive");
    const double g = p2.gamma;
    if (x < b) return std::pow(1.0 + b, -g) / std::pow(b, p - 1.0) * (p - 1.0) * std::pow(x, p - 2.0);
    return -g * std::pow(1.0 + x, -g - 1.0);
}

double local_time_mean(double x, double p, double b) {
    if (!(x > 0.0 && x <= b)) throw Error(ErrorKind::InvalidArgument, "need 0 < x <= b");
    if (!(p > 0.0)) throw Error(ErrorKind::InvalidArgument, "p must be positive");
    return std::pow(x, p) / (p * std::pow(b, p - 1.0));
}

}  // namespace harvest
