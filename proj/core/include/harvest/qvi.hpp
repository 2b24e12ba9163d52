#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "harvest/ctmc.hpp"
#include "harvest/model.hpp"
#include "harvest/payoff.hpp"
#include "harvest/simulate.hpp"
#include "harvest/strategies.hpp"

namespace harvest {

enum class Region { Continuation, Harvest, Violation };
std::string_view to_string(Region r) noexcept;

struct QviReport {
    std::vector<double> grid;
    Eigen::MatrixXd pde_residual;       // (L - r) phi, regimes x points
    Eigen::MatrixXd gradient_residual;  // f - phi'
    std::vector<std::vector<Region>> region;  // [regime][point]
    double tol = 0.0;
    double max_violation = 0.0;        // max (max{pde, grad})^+
    double complementarity_gap = 0.0;  // max min{|pde|, |grad|}
};

/// Default region tolerance max(1e-6, 10 h^2 max|phi''|), h the largest spacing.
double default_qvi_tolerance(const GridFunction& phi);

/// Residuals of max{(L - r) phi, f - phi'} = 0. A grid point is
/// Continuation when f - phi' < -tol, Harvest when |f - phi'| <= tol and
/// Violation otherwise. Exact slopes in `phi.slopes` replace finite
/// differences for phi'. Residual checks on smooth candidates say nothing
/// about non-smooth viscosity solutions.
QviReport qvi_check(const GridFunction& phi, const ModelSpec& model, const GeneratorMatrix& q, const YieldFunction& f,
                    double r, std::optional<double> tol = std::nullopt);

/// CSV with columns x,regime,pde_residual,gradient_residual,region.
std::string qvi_csv(const QviReport& report);
/// JSON summary: tolerance, max_violation, complementarity_gap, region counts.
std::string qvi_summary_json(const QviReport& report);

struct PointCheck {
    bool holds = true;
    double worst_x = 0.0;
    Regime worst_regime = 0;
    double worst_value = 0.0;
    Eigen::MatrixXd values;  // (L - r) g on the grid
};

/// Tests (L - r) g <= tol with g(x, a) = int_0^x f(y, a) dy.
PointCheck g_condition_check(const ModelSpec& model, const GeneratorMatrix& q, const YieldFunction& f, double r,
                             const std::vector<double>& grid, double tol = 1e-8);

struct LyapunovViolation {
    double x = 0.0;
    Regime regime = 0;
    double value = 0.0;
    std::string reason;
};

struct LyapunovReport {
    bool holds = true;
    std::vector<LyapunovViolation> violations;
};

/// Checks L W <= tol on the grid, W > 0 at every grid point, and that W
/// decays to 0 at the left end (local power exponent log(W1/W0)/log(x1/x0)
/// of at least `min_exponent`).
LyapunovReport lyapunov_check(const GridFunction& W, const ModelSpec& model, const GeneratorMatrix& q, double tol,
                              double min_exponent = 0.1);

struct DppMember {
    std::string strategy;
    double mean = 0.0;
    double std_error = 0.0;
};

struct DppGap {
    std::vector<DppMember> members;
    std::size_t best = 0;
    double value_at_x0 = 0.0;
    double gap = 0.0;        // best member mean minus value_fn(x0, alpha0)
    double std_error = 0.0;  // of the best member
    std::string note;
};

using ValueFn = std::function<double(double, Regime)>;

/// For each member: E[income on [0, tau ^ eta] + e^{-r (tau ^ eta)} V(X(tau ^ eta), alpha(tau ^ eta))],
/// using common random numbers across the family. The supremum is taken
/// over the finite family only. value_fn is treated as 0 at x <= 0.
DppGap dpp_gap(const ModelSpec& model, const GeneratorMatrix& q, const std::vector<StrategySpec>& family,
               const YieldFunction& f, double r, double x0, Regime alpha0, double eta, const ValueFn& value_fn,
               const SimConfig& sim, const McConfig& mc);

/// Least-squares slope of log(err) against log(h).
double observed_order(const std::vector<double>& h, const std::vector<double>& err);

}  // namespace harvest
