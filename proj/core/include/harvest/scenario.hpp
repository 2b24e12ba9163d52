#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "harvest/analytic.hpp"
#include "harvest/ctmc.hpp"
#include "harvest/model.hpp"
#include "harvest/payoff.hpp"
#include "harvest/simulate.hpp"
#include "harvest/strategies.hpp"

namespace harvest {

enum class Reference { None, Example1, Example2 };

struct QviGridSettings {
    double lo = 0.1;
    double hi = 20.0;
    std::size_t points = 2000;
    std::optional<double> tol;
    bool operator==(const QviGridSettings&) const = default;
};

struct DppSettings {
    double eta = 1.0;
    std::vector<StrategySpec> family;
    bool operator==(const DppSettings&) const = default;
};

/// Fully resolved scenario. Config files use 1-based regime labels; every
/// Regime stored here is 0-based.
struct Scenario {
    std::string id;
    ModelSpec model = ModelSpec::gbm({0.0}, {0.0});
    GeneratorMatrix q = two_state_generator(1.0, 1.0);
    YieldFunction yield = YieldFunction::constant({1.0});
    double r = 0.1;
    StrategySpec strategy{NoHarvest{}};
    std::vector<double> x0;
    std::vector<Regime> alpha0;
    SimConfig sim;
    McConfig mc;
    std::vector<std::string> checks;  // subset of qvi, g_condition, lyapunov, dpp
    Reference reference = Reference::None;
    QviGridSettings qvi;
    DppSettings dpp;
};

bool same_model(const ModelSpec& a, const ModelSpec& b);
bool same_yield(const YieldFunction& a, const YieldFunction& b);
bool operator==(const Scenario& a, const Scenario& b);

/// Parses the JSON scenario format. Errors are ConfigParse (with the key
/// path or byte offset) or DimensionMismatch.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);
std::string serialize_scenario(const Scenario& s);

/// Strategy records on their own (also used for the dpp family).
StrategySpec parse_strategy(const std::string& json_text);
std::string serialize_strategy(const StrategySpec& s);

/// Closed-form parameter views; throw ConfigParse when the scenario does
/// not have the two-regime GBM shape the examples need.
Example1Params example1_params(const Scenario& s);
Example2Params example2_params(const Scenario& s);

/// Closed-form value at (x, a) for the scenario's reference, if any.
std::optional<double> reference_value(const Scenario& s, double x, Regime a);

/// JSON with every analytic intermediate (xi, case, roots, l_j, C_j, p, b).
std::string analytic_report_json(const Scenario& s);

struct ScenarioRow {
    double x0 = 0.0;
    Regime alpha0 = 0;
    PayoffEstimate estimate;
    std::optional<double> closed_form;
    std::optional<double> z_score;
};

std::vector<ScenarioRow> run_scenario_estimates(const Scenario& s);
/// Columns x0,alpha0,J_mc,stderr,phi_closed,z_score.
std::string scenario_table_csv(const std::vector<ScenarioRow>& rows);

/// Writes one JSON record per run into `dir`, never overwriting an existing
/// file. Returns the written path.
std::filesystem::path write_run_record(const std::filesystem::path& dir, const Scenario& s,
                                       const std::string& command, const std::string& results_json);

/// Build fingerprint compiled into the library.
std::string build_fingerprint();

}  // namespace harvest
