#include "harvest/payoff.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "harvest/error.hpp"
#include "parallel_detail.hpp"
#include "path_engine.hpp"
#include "payoff_detail.hpp"

namespace harvest {

namespace {

struct Summary {
    double mean;
    double std_error;
};

Summary summarize(const std::vector<double>& v, bool antithetic) {
    const std::size_t n = v.size();
    const double mean = pairwise_sum(v) / static_cast<double>(n);
    std::vector<double> units;
    if (antithetic) {
        units.resize(n / 2);
        for (std::size_t j = 0; j < units.size(); ++j) units[j] = 0.5 * (v[2 * j] + v[2 * j + 1]);
    } else {
        units = v;
    }
    const std::size_t u = units.size();
    if (u < 2) return {mean, 0.0};
    for (auto& x : units) x = (x - mean) * (x - mean);
    const double var = pairwise_sum(units) / static_cast<double>(u - 1);
    return {mean, std::sqrt(var / static_cast<double>(u))};
}

}  // namespace

void validate_mc_config(const McConfig& mc) {
    if (mc.n_paths < 1) throw Error(ErrorKind::InvalidArgument, "n_paths must be >= 1");
    if (mc.antithetic && mc.n_paths % 2 != 0) {
        throw Error(ErrorKind::InvalidArgument, "antithetic sampling needs an even path count");
    }
}

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

double path_payoff(const HarvestedPath& path, const YieldFunction& f, double r) {
    if (!(r >= 0.0)) throw Error(ErrorKind::InvalidArgument, "discount rate must be >= 0");
    double total = 0.0;
    for (const auto& e : path.events) {
        if (path.tau && e.t > *path.tau) break;
        total += std::exp(-r * e.t) * yield_eval(f, e.x, e.regime) * e.amount;
    }
    return total;
}

std::vector<PayoffEstimate> estimate_J_multi(const ModelSpec& model, const GeneratorMatrix& q,
                                             const StrategySpec& strategy, const std::vector<YieldFunction>& fs,
                                             double r, double x0, Regime alpha0, const SimConfig& sim,
                                             const McConfig& mc) {
    if (!(r >= 0.0)) throw Error(ErrorKind::InvalidArgument, "discount rate must be >= 0");
    if (fs.empty()) throw Error(ErrorKind::InvalidArgument, "no yield function given");
    validate_mc_config(mc);
    detail::check_inputs(model, q, &strategy, x0, alpha0, sim);

    const std::size_t n = mc.n_paths;
    std::vector<std::vector<double>> income(fs.size(), std::vector<double>(n));
    std::vector<double> biomass(n, 0.0);
    std::vector<char> truncated(n, 0);

    detail::parallel_for(n, mc.threads, [&](std::size_t i) {
        const auto [seed, negate] = detail::path_seed(mc.base_seed, i, mc.antithetic);
        detail::IncomeSink sink(fs, r);
        const auto out = detail::run_path(model, q, &strategy, x0, alpha0, sim, seed, negate, sink);
        for (std::size_t k = 0; k < fs.size(); ++k) income[k][i] = sink.income[k];
        if (out.truncated) {
            truncated[i] = 1;
            biomass[i] = out.x;
        }
    });

    TruncationStats stats;
    stats.n_paths = n;
    for (std::size_t i = 0; i < n; ++i) stats.n_truncated += truncated[i] ? 1 : 0;
    stats.biomass_sum = pairwise_sum(biomass);

    std::vector<PayoffEstimate> out;
    for (std::size_t k = 0; k < fs.size(); ++k) {
        const auto s = summarize(income[k], mc.antithetic);
        PayoffEstimate e;
        e.mean = s.mean;
        e.std_error = s.std_error;
        e.n_paths = n;
        e.truncated_fraction = static_cast<double>(stats.n_truncated) / static_cast<double>(n);
        e.tail_bound = tail_bound(stats, fs[k], r, sim.horizon, model.max_growth_rate());
        out.push_back(e);
    }
    return out;
}

PayoffEstimate estimate_J(const ModelSpec& model, const GeneratorMatrix& q, const StrategySpec& strategy,
                          const YieldFunction& f, double r, double x0, Regime alpha0, const SimConfig& sim,
                          const McConfig& mc) {
    return estimate_J_multi(model, q, strategy, {f}, r, x0, alpha0, sim, mc).front();
}

double tail_bound(const TruncationStats& stats, const YieldFunction& f, double r, double horizon,
                  std::optional<double> mu_max) {
    if (stats.n_truncated == 0) return 0.0;
    if (!mu_max) return std::numeric_limits<double>::infinity();
    const double mu = std::max(*mu_max, 0.0);
    if (mu >= r) return std::numeric_limits<double>::infinity();
    const double mean_biomass = stats.biomass_sum / static_cast<double>(stats.n_paths);
    return std::exp(-r * horizon) * f.sup() * mean_biomass * r / (r - mu);
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string estimate_csv_header() {
    return "scenario_id,x0,alpha0,strategy,n_paths,mean,stderr,truncated_fraction,tail_bound";
}

std::string estimate_csv_row(const std::string& scenario_id, double x0, Regime alpha0, const std::string& strategy,
                             const PayoffEstimate& e) {
    std::ostringstream os;
    os << scenario_id << ',' << format_double(x0) << ',' << alpha0 + 1 << ',' << strategy << ',' << e.n_paths << ','
       << format_double(e.mean) << ',' << format_double(e.std_error) << ',' << format_double(e.truncated_fraction)
       << ',' << format_double(e.tail_bound);
    return os.str();
}

}  // namespace harvest
