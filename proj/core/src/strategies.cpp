#include "harvest/strategies.hpp"

#include <algorithm>
#include <cmath>
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

// n^-5 window with events at i * window / n.
double chattering_window(std::size_t n) { return std::pow(static_cast<double>(n), -5.0); }

double chattering_time(std::size_t i, std::size_t n) {
    return static_cast<double>(i) * chattering_window(n) / static_cast<double>(n);
}

bool at_level(double x, double level) { return std::abs(x - level) <= 1e-9 * std::max(1.0, std::abs(level)); }

int composite_depth(const StrategySpec& spec) {
    if (const auto* c = std::get_if<Composite>(&spec.kind)) {
        const int d1 = c->first ? composite_depth(*c->first) : 0;
        const int d2 = c->then ? composite_depth(*c->then) : 0;
        return 1 + std::max(d1, d2);
    }
    return 0;
}

void merge(LevelBracket& b, double level, double x) {
    if (level >= x) {
        b.above = std::min(b.above, level);
    } else {
        b.below = std::max(b.below, level);
    }
}

void collect_levels(const StrategySpec& spec, const StrategyState& state, double x, Regime a, LevelBracket& out) {
    std::visit(overloaded{
                   [&](const Barrier& b) { merge(out, b.level, x); },
                   [&](const ThresholdExport& e) {
                       if (!state.done && a == e.regime) merge(out, e.level, x);
                   },
                   [&](const Composite& c) {
                       if (!state.switched) {
                           merge(out, c.switch_level, x);
                           collect_levels(*c.first, state.children[0], x, a, out);
                       } else {
                           collect_levels(*c.then, state.children[1], x, a, out);
                       }
                   },
                   [](const auto&) {},
               },
               spec.kind);
}

}  // namespace

bool Composite::operator==(const Composite& other) const {
    auto same = [](const std::shared_ptr<const StrategySpec>& a, const std::shared_ptr<const StrategySpec>& b) {
        if (!a || !b) return a == b;
        return *a == *b;
    };
    return switch_level == other.switch_level && same(first, other.first) && same(then, other.then);
}

StrategySpec make_composite(StrategySpec first, double switch_level, StrategySpec then) {
    return StrategySpec{Composite{std::make_shared<const StrategySpec>(std::move(first)), switch_level,
                                  std::make_shared<const StrategySpec>(std::move(then))}};
}

void validate_strategy(const StrategySpec& spec) {
    std::visit(overloaded{
                   [](const Chattering& c) {
                       if (c.n < 1) throw Error(ErrorKind::InvalidArgument, "chattering needs n >= 1");
                       if (!(c.target >= 0.0)) throw Error(ErrorKind::InvalidArgument, "chattering target must be >= 0");
                   },
                   [](const RegimeTriggeredDepletion& r) {
                       if (r.trigger.empty()) throw Error(ErrorKind::InvalidArgument, "trigger set is empty");
                   },
                   [](const Barrier& b) {
                       if (!(b.level > 0.0)) throw Error(ErrorKind::InvalidArgument, "barrier level must be > 0");
                       if (!(b.rho >= 0.0) || b.rho >= b.level) {
                           throw Error(ErrorKind::InvalidArgument, "barrier initial atom must lie in [0, level)");
                       }
                   },
                   [](const ThresholdExport& e) {
                       if (!(e.level > 0.0)) throw Error(ErrorKind::InvalidArgument, "export level must be > 0");
                   },
                   [](const Composite& c) {
                       if (!c.first || !c.then) throw Error(ErrorKind::InvalidArgument, "composite needs both parts");
                       if (!(c.switch_level >= 0.0)) throw Error(ErrorKind::InvalidArgument, "switch level must be >= 0");
                       validate_strategy(*c.first);
                       validate_strategy(*c.then);
                   },
                   [](const auto&) {},
               },
               spec.kind);
    if (composite_depth(spec) > 2) throw Error(ErrorKind::InvalidArgument, "composite nesting deeper than 2");
}

std::string describe(const StrategySpec& spec) {
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const NoHarvest&) { os << "no_harvest"; },
                   [&](const InstantDepletion&) { os << "instant_depletion"; },
                   [&](const Chattering& c) { os << "chattering(n=" << c.n << ";target=" << c.target << ")"; },
                   [&](const RegimeTriggeredDepletion& r) {
                       os << "regime_triggered_depletion(";
                       for (std::size_t i = 0; i < r.trigger.size(); ++i) os << (i ? ";" : "") << r.trigger[i] + 1;
                       os << ")";
                   },
                   [&](const Barrier& b) { os << "barrier(b=" << b.level << ";rho=" << b.rho << ")"; },
                   [&](const ThresholdExport& e) {
                       os << "threshold_export(M=" << e.level << ";regime=" << e.regime + 1 << ")";
                   },
                   [&](const Composite& c) {
                       os << "composite(" << describe(*c.first) << ";switch=" << c.switch_level << ";"
                          << describe(*c.then) << ")";
                   },
               },
               spec.kind);
    return os.str();
}

ChatteringSchedule chattering_schedule(double x0, double target, std::size_t n, double horizon) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "chattering needs n >= 1");
    if (!(target >= 0.0)) throw Error(ErrorKind::InvalidArgument, "chattering target must be >= 0");
    ChatteringSchedule s;
    s.window = chattering_window(n);
    if (!(x0 > target)) return s;
    const double spacing = s.window / static_cast<double>(n);
    if (n > 1 && spacing < std::ldexp(std::max(horizon, 0.0), -40)) {
        std::ostringstream os;
        os << "chattering spacing " << spacing << " for n = " << n
           << " is below floating-point resolution; use instant depletion as the n -> inf limit";
        throw Error(ErrorKind::ScheduleUnderflow, os.str());
    }
    s.delta = (x0 - target) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.times.push_back(chattering_time(i, n));
        s.levels.push_back(i + 1 == n ? target : x0 - static_cast<double>(i + 1) * s.delta);
    }
    return s;
}

StrategyState initial_state(const StrategySpec& spec) {
    StrategyState st;
    if (const auto* c = std::get_if<Composite>(&spec.kind)) {
        st.children.push_back(initial_state(*c->first));
        st.children.push_back(initial_state(*c->then));
    }
    return st;
}

HarvestAction strategy_step(const StrategySpec& spec, StrategyState& state, double t, double x_pre, Regime a,
                            double horizon) {
    HarvestAction act;
    std::visit(overloaded{
                   [&](const NoHarvest&) {
                       state.done = true;
                       act.done = true;
                   },
                   [&](const InstantDepletion&) {
                       if (!state.done) {
                           act.atom = x_pre;
                           state.done = true;
                       }
                       act.done = true;
                   },
                   [&](const Chattering& c) {
                       if (!state.active) {
                           state.active = true;
                           state.t_start = t;
                           state.x_start = x_pre;
                           const auto sched = chattering_schedule(x_pre, c.target, c.n, horizon);
                           state.delta = sched.delta;
                           if (sched.times.empty()) state.done = true;
                       }
                       double x = x_pre;
                       while (!state.done && t >= state.t_start + chattering_time(state.next_event, c.n)) {
                           const std::size_t i = state.next_event;
                           const double level =
                               (i + 1 == c.n) ? c.target : state.x_start - static_cast<double>(i + 1) * state.delta;
                           const double dz = std::max(x - level, 0.0);
                           act.atom += dz;
                           x -= dz;
                           if (++state.next_event == c.n) state.done = true;
                       }
                       act.done = state.done;
                   },
                   [&](const RegimeTriggeredDepletion& r) {
                       if (!state.done && std::find(r.trigger.begin(), r.trigger.end(), a) != r.trigger.end()) {
                           act.atom = x_pre;
                           state.done = true;
                       }
                       act.done = state.done;
                   },
                   [&](const Barrier& b) {
                       if (!state.active) {
                           state.active = true;
                           state.t_start = t;
                           if (b.rho > 0.0 && at_level(x_pre, b.level)) act.atom = std::min(b.rho, x_pre);
                       }
                       act.reflect_at = b.level;
                   },
                   [&](const ThresholdExport& e) {
                       if (!state.done && a == e.regime && x_pre >= e.level) {
                           act.atom = e.level;
                           state.done = true;
                       }
                       act.done = state.done;
                   },
                   [&](const Composite& c) {
                       if (!state.switched && x_pre <= c.switch_level) state.switched = true;
                       if (state.switched) {
                           act = strategy_step(*c.then, state.children[1], t, x_pre, a, horizon);
                           return;
                       }
                       act = strategy_step(*c.first, state.children[0], t, x_pre, a, horizon);
                       act.done = false;
                       if (x_pre - act.atom <= c.switch_level) act.requery = true;
                   },
               },
               spec.kind);
    return act;
}

double next_event_time(const StrategySpec& spec, const StrategyState& state) {
    constexpr double none = std::numeric_limits<double>::infinity();
    return std::visit(overloaded{
                          [&](const Chattering& c) {
                              if (!state.active || state.done) return none;
                              return state.t_start + chattering_time(state.next_event, c.n);
                          },
                          [&](const Composite& c) {
                              return state.switched ? next_event_time(*c.then, state.children[1])
                                                    : next_event_time(*c.first, state.children[0]);
                          },
                          [&](const auto&) { return none; },
                      },
                      spec.kind);
}

LevelBracket watch_levels(const StrategySpec& spec, const StrategyState& state, double x, Regime a) {
    LevelBracket out;
    collect_levels(spec, state, x, a, out);
    return out;
}

bool exhausted(const StrategySpec& spec, const StrategyState& state) {
    return std::visit(overloaded{
                          [](const NoHarvest&) { return true; },
                          [](const Barrier&) { return false; },
                          [&](const Composite& c) { return state.switched && exhausted(*c.then, state.children[1]); },
                          [&](const auto&) { return state.done; },
                      },
                      spec.kind);
}

std::optional<EventTimes> requires_event_times(const StrategySpec& spec) {
    EventTimes ev;
    std::visit(overloaded{
                   [&](const InstantDepletion&) { ev.times.push_back(0.0); },
                   [&](const Chattering& c) {
                       for (std::size_t i = 0; i < c.n; ++i) ev.times.push_back(chattering_time(i, c.n));
                   },
                   [&](const Composite& c) {
                       if (auto f = requires_event_times(*c.first)) {
                           ev.times = f->times;
                           ev.after_switch = f->after_switch;
                       }
                       if (auto s = requires_event_times(*c.then)) {
                           ev.after_switch.insert(ev.after_switch.end(), s->times.begin(), s->times.end());
                           ev.after_switch.insert(ev.after_switch.end(), s->after_switch.begin(), s->after_switch.end());
                       }
                       std::sort(ev.after_switch.begin(), ev.after_switch.end());
                       ev.after_switch.erase(std::unique(ev.after_switch.begin(), ev.after_switch.end()),
                                             ev.after_switch.end());
                   },
                   [](const auto&) {},
               },
               spec.kind);
    if (ev.times.empty() && ev.after_switch.empty()) return std::nullopt;
    return ev;
}

}  // namespace harvest
