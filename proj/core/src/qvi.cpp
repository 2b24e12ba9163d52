#include "harvest/qvi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "harvest/analytic.hpp"
#include "harvest/error.hpp"
#include "parallel_detail.hpp"
#include "path_engine.hpp"
#include "payoff_detail.hpp"

namespace harvest {

std::string_view to_string(Region r) noexcept {
    switch (r) {
        case Region::Continuation: return "Continuation";
        case Region::Harvest: return "Harvest";
        case Region::Violation: return "Violation";
    }
    return "?";
}

double default_qvi_tolerance(const GridFunction& phi) {
    const auto d = differentiate(phi);
    double h = 0.0;
    for (std::size_t i = 1; i < phi.grid.size(); ++i) h = std::max(h, phi.grid[i] - phi.grid[i - 1]);
    return std::max(1e-6, 10.0 * h * h * d.second.cwiseAbs().maxCoeff());
}

QviReport qvi_check(const GridFunction& phi, const ModelSpec& model, const GeneratorMatrix& q, const YieldFunction& f,
                    double r, std::optional<double> tol) {
    const auto lr = generator_apply(phi, model, q, r);
    const auto d = differentiate(phi);
    const std::size_t m = phi.regimes();
    const std::size_t n = phi.points();

    QviReport rep;
    rep.grid = phi.grid;
    rep.tol = tol ? *tol : default_qvi_tolerance(phi);
    if (!(rep.tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
    rep.pde_residual = lr.values;
    rep.gradient_residual.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    rep.region.assign(m, std::vector<Region>(n, Region::Violation));
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto ai = static_cast<Eigen::Index>(a);
            const auto ii = static_cast<Eigen::Index>(i);
            const double grad = yield_eval(f, phi.grid[i], a) - d.first(ai, ii);
            const double pde = rep.pde_residual(ai, ii);
            rep.gradient_residual(ai, ii) = grad;
            if (grad < -rep.tol) {
                rep.region[a][i] = Region::Continuation;
            } else if (std::abs(grad) <= rep.tol) {
                rep.region[a][i] = Region::Harvest;
            }
            rep.max_violation = std::max(rep.max_violation, std::max(std::max(pde, grad), 0.0));
            rep.complementarity_gap = std::max(rep.complementarity_gap, std::min(std::abs(pde), std::abs(grad)));
        }
    }
    return rep;
}

std::string qvi_csv(const QviReport& report) {
    std::ostringstream os;
    os << "x,regime,pde_residual,gradient_residual,region\n";
    for (std::size_t a = 0; a < report.region.size(); ++a) {
        for (std::size_t i = 0; i < report.grid.size(); ++i) {
            const auto ai = static_cast<Eigen::Index>(a);
            const auto ii = static_cast<Eigen::Index>(i);
            os << format_double(report.grid[i]) << ',' << a + 1 << ',' << format_double(report.pde_residual(ai, ii))
               << ',' << format_double(report.gradient_residual(ai, ii)) << ',' << to_string(report.region[a][i])
               << '\n';
        }
    }
    return os.str();
}

std::string qvi_summary_json(const QviReport& report) {
    std::size_t counts[3] = {0, 0, 0};
    for (const auto& row : report.region)
        for (auto r : row) ++counts[static_cast<int>(r)];
    nlohmann::ordered_json j;
    j["points"] = report.grid.size();
    j["regimes"] = report.region.size();
    j["tolerance"] = report.tol;
    j["max_violation"] = report.max_violation;
    j["complementarity_gap"] = report.complementarity_gap;
    j["continuation_points"] = counts[0];
    j["harvest_points"] = counts[1];
    j["violation_points"] = counts[2];
    j["note"] = "grid residuals of a smooth candidate; not a viscosity-solution test";
    return j.dump(2);
}

PointCheck g_condition_check(const ModelSpec& model, const GeneratorMatrix& q, const YieldFunction& f, double r,
                             const std::vector<double>& grid, double tol) {
    const std::size_t m = model.regimes();
    auto g = GridFunction::sample(grid, m, [&](double x, Regime a) { return g_integral(f, x, a); });
    g.slopes = GridFunction::sample(grid, m, [&](double x, Regime a) { return yield_eval(f, x, a); }).values;
    const auto lr = generator_apply(g, model, q, r);

    PointCheck out;
    out.values = lr.values;
    out.worst_value = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double v = lr.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(i));
            if (v > out.worst_value) {
                out.worst_value = v;
                out.worst_x = grid[i];
                out.worst_regime = a;
            }
        }
    }
    out.holds = out.worst_value <= tol;
    return out;
}

LyapunovReport lyapunov_check(const GridFunction& W, const ModelSpec& model, const GeneratorMatrix& q, double tol,
                              double min_exponent) {
    const auto lw = generator_apply(W, model, q, 0.0);
    LyapunovReport rep;
    for (std::size_t a = 0; a < W.regimes(); ++a) {
        const auto ai = static_cast<Eigen::Index>(a);
        for (std::size_t i = 0; i < W.points(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            if (lw.values(ai, ii) > tol) {
                rep.violations.push_back({W.grid[i], a, lw.values(ai, ii), "LW > 0"});
            }
            if (!(W.values(ai, ii) > 0.0)) {
                rep.violations.push_back({W.grid[i], a, W.values(ai, ii), "W not positive away from 0"});
            }
        }
        const double w0 = W.values(ai, 0);
        const double w1 = W.values(ai, 1);
        if (w0 > 0.0 && w1 > 0.0) {
            const double s = std::log(w1 / w0) / std::log(W.grid[1] / W.grid[0]);
            if (!(s >= min_exponent)) {
                rep.violations.push_back({W.grid[0], a, s, "W does not vanish at 0 (local exponent too small)"});
            }
        }
    }
    rep.holds = rep.violations.empty();
    return rep;
}

DppGap dpp_gap(const ModelSpec& model, const GeneratorMatrix& q, const std::vector<StrategySpec>& family,
               const YieldFunction& f, double r, double x0, Regime alpha0, double eta, const ValueFn& value_fn,
               const SimConfig& sim, const McConfig& mc) {
    if (family.empty()) throw Error(ErrorKind::InvalidArgument, "strategy family is empty");
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw Error(ErrorKind::InvalidArgument, "eta must be finite and >= 0");
    if (!(r >= 0.0)) throw Error(ErrorKind::InvalidArgument, "discount rate must be >= 0");
    validate_mc_config(mc);

    SimConfig cfg = sim;
    cfg.stop_when_exhausted = false;
    SimConfig check_cfg = cfg;
    check_cfg.horizon = std::max(eta, cfg.dt);
    cfg.horizon = eta;

    auto value = [&](double x, Regime a) { return x <= 0.0 ? 0.0 : value_fn(x, a); };

    DppGap out;
    out.value_at_x0 = value(x0, alpha0);
    const std::vector<YieldFunction> fs{f};
    const std::size_t n = mc.n_paths;
    for (const auto& strategy : family) {
        detail::check_inputs(model, q, &strategy, x0, alpha0, check_cfg);
        std::vector<double> total(n);
        detail::parallel_for(n, mc.threads, [&](std::size_t i) {
            const auto [seed, negate] = detail::path_seed(mc.base_seed, i, mc.antithetic);
            detail::IncomeSink sink(fs, r);
            const auto o = detail::run_path(model, q, &strategy, x0, alpha0, cfg, seed, negate, sink);
            total[i] = sink.income[0] + std::exp(-r * o.t) * value(o.x, o.regime);
        });
        const double mean = pairwise_sum(total) / static_cast<double>(n);
        for (auto& v : total) v = (v - mean) * (v - mean);
        const double se = n > 1 ? std::sqrt(pairwise_sum(total) / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
        out.members.push_back({describe(strategy), mean, se});
    }
    for (std::size_t k = 1; k < out.members.size(); ++k)
        if (out.members[k].mean > out.members[out.best].mean) out.best = k;
    out.gap = out.members[out.best].mean - out.value_at_x0;
    out.std_error = out.members[out.best].std_error;
    out.note = "supremum over the supplied finite family only";
    return out;
}

double observed_order(const std::vector<double>& h, const std::vector<double>& err) {
    if (h.size() != err.size() || h.size() < 2) throw Error(ErrorKind::InvalidArgument, "need matching samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double lx = std::log(h[i]);
        const double ly = std::log(err[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace harvest
