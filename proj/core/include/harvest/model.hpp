#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "harvest/ctmc.hpp"

namespace harvest {

/// Regime-switching geometric Brownian motion: b = mu_a x, sigma = sigma_a x.
struct GbmCoefficients {
    std::vector<double> mu;
    std::vector<double> sigma;
};

/// Arithmetic Brownian motion with state-independent coefficients.
struct AbmCoefficients {
    std::vector<double> drift;
    std::vector<double> sigma;
};

/// Knot table backing a config-supplied tabulated model; the coefficients are
/// interpolated linearly in x and held constant outside the knot range.
struct CoefficientTable {
    std::vector<double> x;
    std::vector<std::vector<double>> drift;      // [regime][knot]
    std::vector<std::vector<double>> diffusion;  // [regime][knot]
    bool operator==(const CoefficientTable&) const = default;
};

/// Arbitrary coefficient maps. The maps are trusted as given; see
/// `lipschitz_probe` for an advisory regularity check.
struct TabulatedCoefficients {
    std::function<double(double, Regime)> drift;
    std::function<double(double, Regime)> diffusion;
    std::optional<CoefficientTable> table;  // set when built from knots
};

class ModelSpec {
public:
    using Kind = std::variant<GbmCoefficients, AbmCoefficients, TabulatedCoefficients>;

    static ModelSpec gbm(std::vector<double> mu, std::vector<double> sigma);
    static ModelSpec abm(std::vector<double> drift, std::vector<double> sigma);
    static ModelSpec tabulated(std::size_t regimes, std::function<double(double, Regime)> drift,
                               std::function<double(double, Regime)> diffusion);
    static ModelSpec tabulated(CoefficientTable table);

    std::size_t regimes() const noexcept { return regimes_; }
    const Kind& kind() const noexcept { return kind_; }
    bool is_gbm() const noexcept { return std::holds_alternative<GbmCoefficients>(kind_); }
    bool is_abm() const noexcept { return std::holds_alternative<AbmCoefficients>(kind_); }

    /// Linear-growth constant max_a(|mu_a| + |sigma_a|) for GBM/ABM; empty for
    /// tabulated models.
    std::optional<double> kappa0() const noexcept { return kappa0_; }

    /// Largest per-regime growth rate mu_a (GBM only).
    std::optional<double> max_growth_rate() const;

private:
    ModelSpec(std::size_t regimes, Kind kind, std::optional<double> kappa0)
        : regimes_(regimes), kind_(std::move(kind)), kappa0_(kappa0) {}

    std::size_t regimes_;
    Kind kind_;
    std::optional<double> kappa0_;
};

double drift(const ModelSpec& model, double x, Regime a);
double diffusion(const ModelSpec& model, double x, Regime a);

struct ConstantPerRegimeYield {
    std::vector<double> price;
};

/// f(x, a) = (1 + x)^(-gamma) in every regime.
struct PowerDecayYield {
    double gamma;
};

class YieldFunction {
public:
    using Kind = std::variant<ConstantPerRegimeYield, PowerDecayYield>;

    static YieldFunction constant(std::vector<double> price);
    static YieldFunction power_decay(double gamma);

    const Kind& kind() const noexcept { return kind_; }
    /// Largest value of f over x >= 0 and all regimes (attained at x = 0).
    double sup() const;

private:
    explicit YieldFunction(Kind kind) : kind_(std::move(kind)) {}
    Kind kind_;
};

/// Price per unit harvested. Throws NegativePopulation for x < 0.
double yield_eval(const YieldFunction& f, double x, Regime a);

/// Per-regime samples of a function on a strictly increasing grid in (0, inf).
/// `slopes`, when present, carries exact first derivatives and takes the place
/// of finite differences wherever a first derivative is needed.
struct GridFunction {
    std::vector<double> grid;
    Eigen::MatrixXd values;                 // regimes x grid.size()
    std::optional<Eigen::MatrixXd> slopes;  // same shape as values

    std::size_t regimes() const noexcept { return static_cast<std::size_t>(values.rows()); }
    std::size_t points() const noexcept { return grid.size(); }

    static GridFunction sample(std::vector<double> grid, std::size_t regimes,
                               const std::function<double(double, Regime)>& fn);
};

std::vector<double> uniform_grid(double lo, double hi, std::size_t points);

/// First and second derivatives of every regime row by three-point stencils
/// (second-order one-sided stencils at both ends). Throws GridTooSmall below
/// five points.
struct GridDerivatives {
    Eigen::MatrixXd first;
    Eigen::MatrixXd second;
};
GridDerivatives differentiate(const GridFunction& h);

/// (L - r) h on the grid:
///   b h' + 1/2 sigma^2 h'' + sum_j q_aj (h(x, j) - h(x, a)) - r h.
GridFunction generator_apply(const GridFunction& h, const ModelSpec& model, const GeneratorMatrix& q, double r);

struct LipschitzReport {
    double max_difference_ratio = 0.0;  // max (|db| + |dsigma|) / |dx| over adjacent samples
    double max_drift_ratio = 0.0;
    double max_diffusion_ratio = 0.0;
    double max_growth_ratio = 0.0;      // max (|b| + |sigma|) / (1 + |x|)
};

/// Empirical Lipschitz and linear-growth constants from `samples` equally
/// spaced points of [lo, hi]. Advisory only.
LipschitzReport lipschitz_probe(const ModelSpec& model, double lo, double hi, std::size_t samples);

}  // namespace harvest
