#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "harvest/ctmc.hpp"

namespace harvest {

struct StrategySpec;

/// Harvest everything at the first decision time.
struct InstantDepletion {
    bool operator==(const InstantDepletion&) const = default;
};

/// Z identically zero.
struct NoHarvest {
    bool operator==(const NoHarvest&) const = default;
};

/// n small harvests packed into a window of length n^-5, walking the state
/// down to `target` in equal steps (X(t_i-) - x_{i+1})^+.
struct Chattering {
    std::size_t n = 1;
    double target = 0.0;
    bool operator==(const Chattering&) const = default;
};

/// Deplete fully on the first visit of the environment to any trigger regime.
struct RegimeTriggeredDepletion {
    std::vector<Regime> trigger;
    bool operator==(const RegimeTriggeredDepletion&) const = default;
};

/// Reflect the state at `level` (harvest = local time). When activated with
/// the state sitting at the barrier, an initial atom `rho` is taken first.
/// Configs default rho to 1e-3 * level.
struct Barrier {
    double level = 1.0;
    double rho = 1e-3;
    bool operator==(const Barrier&) const = default;
};

/// Harvest `level` once, the first time (X, alpha) enters [level, inf) x {regime}.
struct ThresholdExport {
    double level = 1.0;
    Regime regime = 0;
    bool operator==(const ThresholdExport&) const = default;
};

/// Run `first` until the state is first at or below `switch_level`, then run
/// `then` with its clock restarted at the switch.
struct Composite {
    std::shared_ptr<const StrategySpec> first;
    double switch_level = 0.0;
    std::shared_ptr<const StrategySpec> then;
    bool operator==(const Composite& other) const;
};

struct StrategySpec {
    using Kind =
        std::variant<NoHarvest, InstantDepletion, Chattering, RegimeTriggeredDepletion, Barrier, ThresholdExport, Composite>;
    Kind kind;

    bool operator==(const StrategySpec&) const = default;
};

StrategySpec make_composite(StrategySpec first, double switch_level, StrategySpec then);

/// Checks parameter ranges and composite nesting depth (at most 2).
void validate_strategy(const StrategySpec& spec);

/// Short human-readable label used in CSV rows.
std::string describe(const StrategySpec& spec);

struct ChatteringSchedule {
    double delta = 0.0;   // (x0 - target) / n
    double window = 0.0;  // n^-5
    std::vector<double> times;   // i * window / n, i = 0..n-1
    std::vector<double> levels;  // x0 - (i + 1) delta, last one exactly target
};

/// Event times and target levels for a chattering run starting at x0. Throws
/// ScheduleUnderflow when the event spacing n^-6 drops below 2^-40 * horizon.
ChatteringSchedule chattering_schedule(double x0, double target, std::size_t n, double horizon = 1.0);

/// Per-path mutable strategy state. Composite children are nested values.
struct StrategyState {
    bool active = false;
    bool done = false;
    double t_start = 0.0;
    // Chattering bookkeeping.
    std::size_t next_event = 0;
    double x_start = 0.0;
    double delta = 0.0;
    // Composite bookkeeping.
    bool switched = false;
    std::vector<StrategyState> children;
};

StrategyState initial_state(const StrategySpec& spec);

struct HarvestAction {
    double atom = 0.0;                  // lump harvest, never above x_pre
    std::optional<double> reflect_at;   // apply the Skorokhod projection at this level
    bool done = false;                  // no further harvest will ever be requested
    bool requery = false;               // query again at the same instant after applying
};

/// One decision of the strategy state machine at time t with pre-harvest
/// state x_pre and current regime a. `horizon` bounds the chattering schedule
/// resolution check.
HarvestAction strategy_step(const StrategySpec& spec, StrategyState& state, double t, double x_pre, Regime a,
                            double horizon = 1.0);

/// Absolute time of the next scheduled event, +inf when nothing is scheduled.
double next_event_time(const StrategySpec& spec, const StrategyState& state);

/// Nearest monitored state levels around x (the simulator must not coarsen
/// its steps across them).
struct LevelBracket {
    double above = std::numeric_limits<double>::infinity();
    double below = -std::numeric_limits<double>::infinity();
};
LevelBracket watch_levels(const StrategySpec& spec, const StrategyState& state, double x, Regime a);

/// True once the strategy can never harvest again.
bool exhausted(const StrategySpec& spec, const StrategyState& state);

/// Static event schedule the simulator has to insert into its step grid.
struct EventTimes {
    std::vector<double> times;               // relative to activation at t = 0
    std::vector<double> after_switch;        // relative to a composite switch
};
std::optional<EventTimes> requires_event_times(const StrategySpec& spec);

}  // namespace harvest
