#include "harvest/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <sstream>

#include "harvest/error.hpp"

namespace harvest {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_regime(const ModelSpec& model, Regime a) {
    if (a >= model.regimes()) {
        std::ostringstream os;
        os << "regime " << a << " with m = " << model.regimes();
        throw Error(ErrorKind::RegimeOutOfRange, os.str());
    }
}

double max_abs_sum(const std::vector<double>& a, const std::vector<double>& b) {
    double k = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) k = std::max(k, std::abs(a[i]) + std::abs(b[i]));
    return k;
}

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const auto k = static_cast<std::size_t>(it - xs.begin());
    const double w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    return (1.0 - w) * ys[k - 1] + w * ys[k];
}

// Fornberg's recursion: weights of the derivatives 0..order at z from the
// given nodes. Returns w[d][k].
template <std::size_t N>
std::array<std::array<double, N>, 3> fd_weights(double z, const std::array<double, N>& x) {
    constexpr int order = 2;
    std::array<std::array<double, N>, 3> c{};
    double c1 = 1.0;
    double c4 = x[0] - z;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < N; ++i) {
        const int mn = std::min<int>(static_cast<int>(i), order);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) {
                    c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k) {
                c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

}  // namespace

ModelSpec ModelSpec::gbm(std::vector<double> mu, std::vector<double> sigma) {
    if (mu.empty() || mu.size() != sigma.size()) {
        throw Error(ErrorKind::DimensionMismatch, "GBM needs one mu and one sigma per regime");
    }
    for (double s : sigma) {
        if (!(s >= 0.0)) throw Error(ErrorKind::InvalidArgument, "GBM volatility must be >= 0");
    }
    const double k = max_abs_sum(mu, sigma);
    const std::size_t m = mu.size();
    return ModelSpec(m, GbmCoefficients{std::move(mu), std::move(sigma)}, k);
}

ModelSpec ModelSpec::abm(std::vector<double> drift, std::vector<double> sigma) {
    if (drift.empty() || drift.size() != sigma.size()) {
        throw Error(ErrorKind::DimensionMismatch, "ABM needs one drift and one sigma per regime");
    }
    for (double s : sigma) {
        if (!(s > 0.0)) throw Error(ErrorKind::InvalidArgument, "ABM volatility must be > 0");
    }
    const double k = max_abs_sum(drift, sigma);
    const std::size_t m = drift.size();
    return ModelSpec(m, AbmCoefficients{std::move(drift), std::move(sigma)}, k);
}

ModelSpec ModelSpec::tabulated(std::size_t regimes, std::function<double(double, Regime)> drift_fn,
                               std::function<double(double, Regime)> diffusion_fn) {
    if (regimes == 0 || !drift_fn || !diffusion_fn) {
        throw Error(ErrorKind::InvalidArgument, "tabulated model needs m >= 1 and both coefficient maps");
    }
    return ModelSpec(regimes, TabulatedCoefficients{std::move(drift_fn), std::move(diffusion_fn), std::nullopt},
                     std::nullopt);
}

ModelSpec ModelSpec::tabulated(CoefficientTable table) {
    const std::size_t m = table.drift.size();
    if (m == 0 || table.diffusion.size() != m || table.x.size() < 2) {
        throw Error(ErrorKind::DimensionMismatch, "coefficient table needs >= 2 knots and one row per regime");
    }
    for (std::size_t k = 1; k < table.x.size(); ++k) {
        if (!(table.x[k] > table.x[k - 1])) throw Error(ErrorKind::InvalidArgument, "table knots must increase");
    }
    for (std::size_t a = 0; a < m; ++a) {
        if (table.drift[a].size() != table.x.size() || table.diffusion[a].size() != table.x.size()) {
            throw Error(ErrorKind::DimensionMismatch, "coefficient rows must match the knot count");
        }
        for (double s : table.diffusion[a]) {
            if (!(s >= 0.0)) throw Error(ErrorKind::InvalidArgument, "tabulated volatility must be >= 0");
        }
    }
    auto shared = std::make_shared<const CoefficientTable>(table);
    auto drift_fn = [shared](double x, Regime a) { return interpolate(shared->x, shared->drift[a], x); };
    auto diffusion_fn = [shared](double x, Regime a) { return interpolate(shared->x, shared->diffusion[a], x); };
    return ModelSpec(m, TabulatedCoefficients{drift_fn, diffusion_fn, std::move(table)}, std::nullopt);
}

std::optional<double> ModelSpec::max_growth_rate() const {
    if (const auto* g = std::get_if<GbmCoefficients>(&kind_)) {
        return *std::max_element(g->mu.begin(), g->mu.end());
    }
    return std::nullopt;
}

double drift(const ModelSpec& model, double x, Regime a) {
    check_regime(model, a);
    return std::visit(overloaded{
                          [&](const GbmCoefficients& g) { return g.mu[a] * x; },
                          [&](const AbmCoefficients& c) { return c.drift[a]; },
                          [&](const TabulatedCoefficients& t) { return t.drift(x, a); },
                      },
                      model.kind());
}

double diffusion(const ModelSpec& model, double x, Regime a) {
    check_regime(model, a);
    return std::visit(overloaded{
                          [&](const GbmCoefficients& g) { return g.sigma[a] * x; },
                          [&](const AbmCoefficients& c) { return c.sigma[a]; },
                          [&](const TabulatedCoefficients& t) { return t.diffusion(x, a); },
                      },
                      model.kind());
}

YieldFunction YieldFunction::constant(std::vector<double> price) {
    if (price.empty()) throw Error(ErrorKind::InvalidArgument, "constant yield needs one price per regime");
    for (double p : price) {
        if (!(p > 0.0) || !std::isfinite(p)) {
            throw Error(ErrorKind::InvalidArgument, "prices must satisfy 0 < f(0, a) < inf");
        }
    }
    return YieldFunction(ConstantPerRegimeYield{std::move(price)});
}

YieldFunction YieldFunction::power_decay(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorKind::InvalidGamma, "power-decay exponent must lie in (0, 1)");
    return YieldFunction(PowerDecayYield{gamma});
}

double YieldFunction::sup() const {
    return std::visit(overloaded{
                          [](const ConstantPerRegimeYield& c) { return *std::max_element(c.price.begin(), c.price.end()); },
                          [](const PowerDecayYield&) { return 1.0; },
                      },
                      kind_);
}

double yield_eval(const YieldFunction& f, double x, Regime a) {
    if (x < 0.0) throw Error(ErrorKind::NegativePopulation, "yield evaluated at negative population");
    return std::visit(overloaded{
                          [&](const ConstantPerRegimeYield& c) {
                              if (a >= c.price.size()) throw Error(ErrorKind::RegimeOutOfRange, "yield regime");
                              return c.price[a];
                          },
                          [&](const PowerDecayYield& p) { return std::pow(1.0 + x, -p.gamma); },
                      },
                      f.kind());
}

GridFunction GridFunction::sample(std::vector<double> grid, std::size_t regimes,
                                  const std::function<double(double, Regime)>& fn) {
    GridFunction out;
    out.values.resize(static_cast<Eigen::Index>(regimes), static_cast<Eigen::Index>(grid.size()));
    for (std::size_t a = 0; a < regimes; ++a) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            out.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(i)) = fn(grid[i], a);
        }
    }
    out.grid = std::move(grid);
    return out;
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
    if (points < 2 || !(hi > lo)) throw Error(ErrorKind::InvalidArgument, "uniform grid needs hi > lo and >= 2 points");
    std::vector<double> g(points);
    const double h = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) g[i] = lo + h * static_cast<double>(i);
    g.back() = hi;
    return g;
}

GridDerivatives differentiate(const GridFunction& h) {
    const std::size_t n = h.points();
    if (n < 5) throw Error(ErrorKind::GridTooSmall, "need at least 5 grid points");
    if (static_cast<std::size_t>(h.values.cols()) != n) {
        throw Error(ErrorKind::DimensionMismatch, "grid and value columns differ");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(h.grid[i] > h.grid[i - 1])) throw Error(ErrorKind::InvalidArgument, "grid must be strictly increasing");
    }
    const auto& x = h.grid;
    const Eigen::Index m = h.values.rows();
    GridDerivatives d{Eigen::MatrixXd(m, static_cast<Eigen::Index>(n)), Eigen::MatrixXd(m, static_cast<Eigen::Index>(n))};

    auto col = [](std::size_t i) { return static_cast<Eigen::Index>(i); };

    // Interior: three-point stencils.
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const auto w = fd_weights<3>(x[i], {x[i - 1], x[i], x[i + 1]});
        for (Eigen::Index a = 0; a < m; ++a) {
            d.first(a, col(i)) = w[1][0] * h.values(a, col(i - 1)) + w[1][1] * h.values(a, col(i)) +
                                 w[1][2] * h.values(a, col(i + 1));
            d.second(a, col(i)) = w[2][0] * h.values(a, col(i - 1)) + w[2][1] * h.values(a, col(i)) +
                                  w[2][2] * h.values(a, col(i + 1));
        }
    }
    // Ends: three nodes for h' and four for h'' keep both second order.
    const std::array<std::size_t, 2> ends{0, n - 1};
    for (std::size_t e : ends) {
        std::array<std::size_t, 4> idx{};
        for (std::size_t k = 0; k < 4; ++k) idx[k] = (e == 0) ? k : n - 1 - k;
        const auto w3 = fd_weights<3>(x[e], {x[idx[0]], x[idx[1]], x[idx[2]]});
        const auto w4 = fd_weights<4>(x[e], {x[idx[0]], x[idx[1]], x[idx[2]], x[idx[3]]});
        for (Eigen::Index a = 0; a < m; ++a) {
            double d1 = 0.0;
            double d2 = 0.0;
            for (std::size_t k = 0; k < 3; ++k) d1 += w3[1][k] * h.values(a, col(idx[k]));
            for (std::size_t k = 0; k < 4; ++k) d2 += w4[2][k] * h.values(a, col(idx[k]));
            d.first(a, col(e)) = d1;
            d.second(a, col(e)) = d2;
        }
    }
    if (h.slopes) {
        if (h.slopes->rows() != m || h.slopes->cols() != col(n)) {
            throw Error(ErrorKind::DimensionMismatch, "slopes must match values");
        }
        d.first = *h.slopes;
    }
    return d;
}

GridFunction generator_apply(const GridFunction& h, const ModelSpec& model, const GeneratorMatrix& q, double r) {
    const std::size_t m = h.regimes();
    if (model.regimes() != m || q.size() != m) {
        throw Error(ErrorKind::DimensionMismatch, "grid function, model and generator disagree on regime count");
    }
    if (!(r >= 0.0)) throw Error(ErrorKind::InvalidArgument, "discount rate must be >= 0");
    const GridDerivatives d = differentiate(h);
    GridFunction out;
    out.grid = h.grid;
    out.values.resize(h.values.rows(), h.values.cols());
    for (std::size_t a = 0; a < m; ++a) {
        const auto ra = static_cast<Eigen::Index>(a);
        for (std::size_t i = 0; i < h.points(); ++i) {
            const auto ci = static_cast<Eigen::Index>(i);
            const double x = h.grid[i];
            const double s = diffusion(model, x, a);
            double coupling = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                if (j == a) continue;
                coupling += q.rate(a, j) * (h.values(static_cast<Eigen::Index>(j), ci) - h.values(ra, ci));
            }
            out.values(ra, ci) = drift(model, x, a) * d.first(ra, ci) + 0.5 * s * s * d.second(ra, ci) + coupling -
                                 r * h.values(ra, ci);
        }
    }
    return out;
}

LipschitzReport lipschitz_probe(const ModelSpec& model, double lo, double hi, std::size_t samples) {
    if (samples < 2 || !(hi > lo) || lo < 0.0) {
        throw Error(ErrorKind::InvalidArgument, "probe box must lie in [0, inf) with >= 2 samples");
    }
    const auto xs = uniform_grid(lo, hi, samples);
    LipschitzReport rep;
    for (Regime a = 0; a < model.regimes(); ++a) {
        double prev_b = drift(model, xs[0], a);
        double prev_s = diffusion(model, xs[0], a);
        rep.max_growth_ratio = std::max(rep.max_growth_ratio, (std::abs(prev_b) + std::abs(prev_s)) / (1.0 + xs[0]));
        for (std::size_t i = 1; i < xs.size(); ++i) {
            const double b = drift(model, xs[i], a);
            const double s = diffusion(model, xs[i], a);
            const double dx = xs[i] - xs[i - 1];
            const double db = std::abs(b - prev_b) / dx;
            const double ds = std::abs(s - prev_s) / dx;
            rep.max_drift_ratio = std::max(rep.max_drift_ratio, db);
            rep.max_diffusion_ratio = std::max(rep.max_diffusion_ratio, ds);
            rep.max_difference_ratio = std::max(rep.max_difference_ratio, db + ds);
            rep.max_growth_ratio = std::max(rep.max_growth_ratio, (std::abs(b) + std::abs(s)) / (1.0 + std::abs(xs[i])));
            prev_b = b;
            prev_s = s;
        }
    }
    return rep;
}

}  // namespace harvest
