#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "harvest/ctmc.hpp"
#include "harvest/model.hpp"
#include "harvest/rng.hpp"
#include "harvest/strategies.hpp"

namespace harvest {

struct SimConfig {
    double dt = 1e-3;
    double horizon = 10.0;           // T_max
    double extinction_level = 0.0;
    Seed seed = 0;
    // Merge runs of base steps into one exact step while the state is far
    // (8 sd) from every monitored level. Only GBM and ABM models; tabulated
    // models always take base steps.
    bool coalesce = true;
    // Stop a path once the strategy can never harvest again.
    bool stop_when_exhausted = false;
};

/// Throws InvalidArgument unless dt > 0, horizon >= dt and extinction_level >= 0.
void validate_sim_config(const SimConfig& cfg);

enum class HarvestKind { Atom, Reflection };

/// One harvest increment. Atoms carry the left limits X(t-), alpha(t-);
/// reflections carry the barrier level and the current regime.
struct HarvestEvent {
    double t = 0.0;
    double amount = 0.0;
    double x = 0.0;
    Regime regime = 0;
    HarvestKind kind = HarvestKind::Atom;
    bool operator==(const HarvestEvent&) const = default;
};

struct HarvestedPath {
    std::vector<double> times;
    std::vector<double> x;        // post-harvest state
    std::vector<Regime> regime;
    std::vector<double> z_cum;
    std::vector<double> dz_atom;  // atom mass at each recorded time
    std::vector<HarvestEvent> events;
    std::optional<double> tau;
    bool truncated = false;
    bool exhausted = false;

    struct Jump {
        double t;
        double dz;
    };
    /// Atoms merged per time point.
    std::vector<Jump> z_jumps() const;
    double total_harvest() const { return z_cum.empty() ? 0.0 : z_cum.back(); }
    bool operator==(const HarvestedPath&) const = default;
};

/// Euler-Maruyama (log-exact for GBM) path without harvesting. Throws
/// NonPositiveInitial for x0 <= 0.
HarvestedPath simulate_uncontrolled(const ModelSpec& model, const GeneratorMatrix& q, double x0, Regime alpha0,
                                    const SimConfig& cfg);

/// Controlled path. Each time point runs: diffuse, chain jump, extinction
/// check, strategy query (atom, then reflection), extinction check, record.
/// Throws NonPositiveInitial or StrategyScheduleOverflow.
HarvestedPath simulate_harvested(const ModelSpec& model, const GeneratorMatrix& q, const StrategySpec& strategy,
                                 const YieldFunction& f, double x0, Regime alpha0, const SimConfig& cfg);

/// Columns t,x,regime,z_cum,dz_atom with 1-based regime labels.
void write_path_csv(std::ostream& os, const HarvestedPath& path);

}  // namespace harvest
