// harvest: command-line front end for the harvesting library.
#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "harvest/analytic.hpp"
#include "harvest/error.hpp"
#include "harvest/payoff.hpp"
#include "harvest/plot.hpp"
#include "harvest/qvi.hpp"
#include "harvest/reference_suite.hpp"
#include "harvest/rng.hpp"
#include "harvest/scenario.hpp"
#include "harvest/simulate.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace harvest;

namespace {

constexpr int kOk = 0;
constexpr int kAcceptanceFailure = 1;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct Common {
    std::string config;
    std::string out = "out";
    std::optional<Seed> seed;
    std::optional<std::size_t> paths;
    unsigned threads = 1;
    bool dump_paths = false;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config) {
    auto* opt = cmd->add_option("--config", c.config, "scenario JSON file");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", c.out, "output directory")->capture_default_str();
    cmd->add_option("--seed", c.seed, "overrides sim.seed and mc.base_seed");
    cmd->add_option("--paths", c.paths, "overrides mc.n_paths")->check(CLI::PositiveNumber);
    cmd->add_option("--threads", c.threads, "worker threads (speed only)")->check(CLI::PositiveNumber);
}

Scenario load(const Common& c) {
    Scenario s = load_scenario(c.config);
    if (c.seed) {
        s.sim.seed = *c.seed;
        s.mc.base_seed = *c.seed;
    }
    if (c.paths) s.mc.n_paths = *c.paths;
    s.mc.threads = c.threads;
    return s;
}

void write_file(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream os(p);
    if (!os) throw Error(ErrorKind::InvalidArgument, "cannot write " + p.string());
    os << text;
}

void record(const Common& c, const Scenario& s, const std::string& command, const json& results) {
    const auto p = write_run_record(fs::path(c.out) / "runs", s, command, results.dump());
    std::cerr << "run record: " << p.string() << '\n';
}

std::string tag(double x0, Regime a) {
    std::ostringstream os;
    os << "x" << format_double(x0) << "_a" << a + 1;
    return os.str();
}

GridFunction reference_grid(const Scenario& s, bool with_slopes = true) {
    if (s.reference == Reference::None) {
        throw Error(ErrorKind::ConfigParse, "reference: a closed form (example1 or example2) is required");
    }
    const auto grid = uniform_grid(s.qvi.lo, s.qvi.hi, s.qvi.points);
    const auto m = s.model.regimes();
    auto phi = GridFunction::sample(grid, m, [&](double x, Regime a) { return reference_value(s, x, a).value(); });
    if (!with_slopes) return phi;
    // Closed-form slopes, so phi' carries no stencil error.
    if (s.reference == Reference::Example1) {
        const auto p = example1_params(s);
        phi.slopes = GridFunction::sample(grid, m, [&](double x, Regime a) { return example1_slope(p, x, a); }).values;
    } else {
        const auto p = example2_params(s);
        phi.slopes = GridFunction::sample(grid, m, [&](double x, Regime) { return example2_slope(p, x); }).values;
    }
    return phi;
}

json estimates_json(const std::vector<ScenarioRow>& rows) {
    json out = json::array();
    for (const auto& r : rows) {
        json j;
        j["x0"] = r.x0;
        j["alpha0"] = r.alpha0 + 1;
        j["mean"] = r.estimate.mean;
        j["stderr"] = r.estimate.std_error;
        j["n_paths"] = r.estimate.n_paths;
        j["truncated_fraction"] = r.estimate.truncated_fraction;
        j["tail_bound"] = std::isfinite(r.estimate.tail_bound) ? json(r.estimate.tail_bound) : json("inf");
        j["closed_form"] = r.closed_form ? json(*r.closed_form) : json(nullptr);
        j["z_score"] = r.z_score ? json(*r.z_score) : json(nullptr);
        out.push_back(j);
    }
    return out;
}

std::string estimate_table(const Scenario& s, const std::vector<ScenarioRow>& rows) {
    std::string csv = estimate_csv_header() + '\n';
    for (const auto& r : rows) csv += estimate_csv_row(s.id, r.x0, r.alpha0, describe(s.strategy), r.estimate) + '\n';
    return csv;
}

int cmd_simulate(const Common& c) {
    Scenario s = load(c);
    const std::size_t n = c.paths.value_or(1);
    const fs::path out(c.out);
    std::ostringstream summary;
    summary << "x0,alpha0,path,seed,tau,truncated,total_harvest,events\n";
    for (double x0 : s.x0) {
        for (Regime a : s.alpha0) {
            for (std::size_t i = 0; i < n; ++i) {
                SimConfig sim = s.sim;
                // Path i matches path i of `estimate` with the same base seed.
                sim.seed = mix_seed(s.mc.base_seed, i);
                const auto path = simulate_harvested(s.model, s.q, s.strategy, s.yield, x0, a, sim);
                summary << format_double(x0) << ',' << a + 1 << ',' << i << ',' << sim.seed << ','
                        << (path.tau ? format_double(*path.tau) : std::string()) << ',' << (path.truncated ? 1 : 0) << ','
                        << format_double(path.total_harvest()) << ',' << path.events.size() << '\n';
                if (c.dump_paths) {
                    std::ostringstream csv;
                    write_path_csv(csv, path);
                    write_file(out / "paths" / (s.id + "_" + tag(x0, a) + "_p" + std::to_string(i) + ".csv"),
                               csv.str());
                }
            }
        }
    }
    write_file(out / "simulate.csv", summary.str());
    std::cout << summary.str();
    record(c, s, "simulate", json{{"paths_per_start", n}, {"dump_paths", c.dump_paths}});
    return kOk;
}

int cmd_estimate(const Common& c) {
    Scenario s = load(c);
    const auto rows = run_scenario_estimates(s);
    const auto csv = estimate_table(s, rows);
    write_file(fs::path(c.out) / "estimate.csv", csv);
    std::cout << csv;
    record(c, s, "estimate", json{{"estimates", estimates_json(rows)}});
    return kOk;
}

int cmd_value(const Common& c) {
    Scenario s = load(c);
    const auto report = analytic_report_json(s);
    const auto phi = reference_grid(s, false);
    std::ostringstream csv;
    csv << "x,regime,value\n";
    for (std::size_t a = 0; a < phi.regimes(); ++a) {
        for (std::size_t i = 0; i < phi.points(); ++i) {
            csv << format_double(phi.grid[i]) << ',' << a + 1 << ','
                << format_double(phi.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(i))) << '\n';
        }
    }
    write_file(fs::path(c.out) / "value.json", report + '\n');
    write_file(fs::path(c.out) / "value.csv", csv.str());
    std::cout << report << '\n';
    record(c, s, "value", json::parse(report));
    return kOk;
}

int cmd_roots(const Common& c) {
    Scenario s = load(c);
    json j;
    if (s.reference == Reference::Example2) {
        const auto p = example2_params(s);
        const auto d = validate(p);
        j["p1"] = positive_root_p(p.base.mu1, p.base.sigma1 * p.base.sigma1, p.base.r);
        j["p2"] = positive_root_p(p.base.mu2, p.base.sigma2 * p.base.sigma2, p.base.r);
        j["p"] = d.p;
        j["b"] = d.b;
    } else {
        const auto p = example1_params(s);
        j["xi"] = xi_threshold(p);
        j["case"] = std::string(to_string(classify_example1(p)));
        const auto roots = characteristic_roots(p);
        j["beta"] = roots.beta;
        j["residual"] = roots.residual;
        j["coefficients"] = roots.coeffs;
    }
    const auto text = j.dump(2);
    write_file(fs::path(c.out) / "roots.json", text + '\n');
    std::cout << text << '\n';
    record(c, s, "roots", j);
    return kOk;
}

json run_checks(const Scenario& s, const fs::path& out) {
    json res = json::object();
    for (const auto& check : s.checks) {
        if (check == "qvi") {
            const auto rep = qvi_check(reference_grid(s), s.model, s.q, s.yield, s.r, s.qvi.tol);
            write_file(out / "qvi.csv", qvi_csv(rep));
            res["qvi"] = json::parse(qvi_summary_json(rep));
        } else if (check == "g_condition") {
            const auto grid = uniform_grid(s.qvi.lo, s.qvi.hi, s.qvi.points);
            const auto pc = g_condition_check(s.model, s.q, s.yield, s.r, grid);
            res["g_condition"] = {{"holds", pc.holds},
                                  {"worst_x", pc.worst_x},
                                  {"worst_regime", pc.worst_regime + 1},
                                  {"worst_value", pc.worst_value}};
        } else if (check == "lyapunov") {
            // W(x, a) = x.
            const auto grid = uniform_grid(s.qvi.lo, s.qvi.hi, s.qvi.points);
            const auto W = GridFunction::sample(grid, s.model.regimes(), [](double x, Regime) { return x; });
            const auto rep = lyapunov_check(W, s.model, s.q, 1e-10);
            json v = json::array();
            for (const auto& e : rep.violations) {
                if (v.size() >= 20) break;
                v.push_back({{"x", e.x}, {"regime", e.regime + 1}, {"value", e.value}, {"reason", e.reason}});
            }
            res["lyapunov"] = {{"W", "x"},
                               {"holds", rep.holds},
                               {"violation_count", rep.violations.size()},
                               {"violations", v}};
        } else if (check == "dpp") {
            if (s.reference == Reference::None) {
                res["dpp"] = {{"skipped", "no closed-form value function"}};
                continue;
            }
            auto family = s.dpp.family;
            if (family.empty()) family.push_back(s.strategy);
            const ValueFn v = [&](double x, Regime a) { return reference_value(s, x, a).value(); };
            json rows = json::array();
            for (double x0 : s.x0) {
                for (Regime a : s.alpha0) {
                    const auto g = dpp_gap(s.model, s.q, family, s.yield, s.r, x0, a, s.dpp.eta, v, s.sim, s.mc);
                    json members = json::array();
                    for (const auto& m : g.members) {
                        members.push_back({{"strategy", m.strategy}, {"mean", m.mean}, {"stderr", m.std_error}});
                    }
                    rows.push_back({{"x0", x0},
                                    {"alpha0", a + 1},
                                    {"value", g.value_at_x0},
                                    {"best", g.best},
                                    {"gap", g.gap},
                                    {"stderr", g.std_error},
                                    {"members", members},
                                    {"note", g.note}});
                }
            }
            res["dpp"] = {{"eta", s.dpp.eta}, {"rows", rows}};
        }
    }
    return res;
}

int cmd_qvi(const Common& c) {
    Scenario s = load(c);
    const auto rep = qvi_check(reference_grid(s), s.model, s.q, s.yield, s.r, s.qvi.tol);
    const auto summary = qvi_summary_json(rep);
    write_file(fs::path(c.out) / "qvi.csv", qvi_csv(rep));
    write_file(fs::path(c.out) / "qvi.json", summary + '\n');
    std::cout << summary << '\n';
    record(c, s, "qvi", json::parse(summary));
    return kOk;
}

int cmd_scenario(const Common& c) {
    Scenario s = load(c);
    const fs::path out(c.out);
    const auto rows = run_scenario_estimates(s);
    const auto table = scenario_table_csv(rows);
    write_file(out / "estimate.csv", estimate_table(s, rows));
    write_file(out / "scenario.csv", table);
    std::cout << table;
    json res;
    res["estimates"] = estimates_json(rows);
    if (s.reference != Reference::None) {
        const auto analytic = analytic_report_json(s);
        write_file(out / "value.json", analytic + '\n');
        res["analytic"] = json::parse(analytic);
    }
    res["checks"] = run_checks(s, out);
    std::cout << res["checks"].dump(2) << '\n';
    record(c, s, "scenario", res);
    return kOk;
}

int cmd_suite(const Common& c, const std::vector<int>& ids) {
    SuiteOptions o;
    o.threads = c.threads;
    o.paths = c.paths;
    o.seed = c.seed;
    const auto results = run_reference_suite(o, ids);
    const fs::path out(c.out);
    bool all = true;
    for (const auto& r : results) {
        std::cout << (r.passed ? "PASS" : "FAIL") << " criterion " << r.id << " " << r.name << " (" << r.seconds
                  << " s): " << r.detail << std::endl;
        write_file(out / ("criterion_" + std::to_string(r.id) + ".csv"), r.csv);
        all = all && r.passed;
    }
    write_file(out / "suite_summary.csv", suite_summary_csv(results));
    return all ? kOk : kAcceptanceFailure;
}

int cmd_plot(const std::string& input, const std::string& kind, const std::string& output, const std::string& title) {
    std::ifstream is(input);
    if (!is) throw Error(ErrorKind::ConfigParse, "cannot read " + input);
    std::stringstream buf;
    buf << is.rdbuf();
    write_plot(output, buf.str(), parse_plot_kind(kind), title);
    std::cout << output << '\n';
    return kOk;
}

int exit_code(ErrorKind k) {
    return (k == ErrorKind::ConfigParse || k == ErrorKind::DimensionMismatch) ? kConfigError : kRuntimeError;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal harvesting under regime switching: simulation, estimation and checks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", build_fingerprint());

    Common c;
    auto* sim = app.add_subcommand("simulate", "simulate controlled paths");
    add_common(sim, c, true);
    sim->add_flag("--dump-paths", c.dump_paths, "write one CSV per path under <out>/paths");
    auto* est = app.add_subcommand("estimate", "Monte Carlo payoff estimates");
    add_common(est, c, true);
    auto* val = app.add_subcommand("value", "closed-form value function");
    add_common(val, c, true);
    auto* roots = app.add_subcommand("roots", "characteristic roots / exponent p");
    add_common(roots, c, true);
    auto* qvi = app.add_subcommand("qvi", "QVI residual report for the closed form");
    add_common(qvi, c, true);
    auto* scen = app.add_subcommand("scenario", "estimates, closed form and requested checks");
    add_common(scen, c, true);
    auto* suite = app.add_subcommand("paper-suite", "built-in acceptance criteria");
    add_common(suite, c, false);
    std::vector<int> ids;
    suite->add_option("--criteria", ids, "subset of criteria 1-8")->check(CLI::Range(1, 8));

    auto* plot = app.add_subcommand("plot", "render a CSV table as SVG");
    std::string plot_in, plot_kind, plot_out, plot_title;
    plot->add_option("--input", plot_in, "CSV table")->required()->check(CLI::ExistingFile);
    plot->add_option("--kind", plot_kind, "value_vs_x | J_vs_n | residual_heatline")->required();
    plot->add_option("--out", plot_out, "output SVG path")->required();
    plot->add_option("--title", plot_title, "plot title");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (sim->parsed()) return cmd_simulate(c);
        if (est->parsed()) return cmd_estimate(c);
        if (val->parsed()) return cmd_value(c);
        if (roots->parsed()) return cmd_roots(c);
        if (qvi->parsed()) return cmd_qvi(c);
        if (scen->parsed()) return cmd_scenario(c);
        if (suite->parsed()) return cmd_suite(c, ids);
        if (plot->parsed()) return cmd_plot(plot_in, plot_kind, plot_out, plot_title);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kRuntimeError;
}
