#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "chain_detail.hpp"
#include "harvest/error.hpp"
#include "harvest/simulate.hpp"
#include "rng_detail.hpp"

namespace harvest::detail {

struct PathOutcome {
    double t = 0.0;
    double x = 0.0;
    Regime regime = 0;
    std::optional<double> tau;
    bool truncated = false;
    bool exhausted = false;
};

// Sinks receive recorded points and harvest events:
//   void point(double t, double x, Regime a, double z_cum, double dz_atom);
//   void harvest(const HarvestEvent&);
//   static constexpr bool wants_points;

inline constexpr double kCoalesceSigmas = 8.0;
inline constexpr std::uint64_t kMaxCoalesce = std::uint64_t{1} << 16;
inline constexpr int kMaxRequery = 16;

inline void check_inputs(const ModelSpec& model, const GeneratorMatrix& q, const StrategySpec* strategy, double x0,
                         Regime a0, const SimConfig& cfg) {
    validate_sim_config(cfg);
    if (!(x0 > 0.0)) {
        std::ostringstream os;
        os << "initial population " << x0 << " must be positive";
        throw Error(ErrorKind::NonPositiveInitial, os.str());
    }
    if (model.regimes() != q.size()) {
        throw Error(ErrorKind::DimensionMismatch, "model and generator regime counts differ");
    }
    if (a0 >= q.size()) throw Error(ErrorKind::RegimeOutOfRange, "initial regime out of range");
    if (!strategy) return;
    validate_strategy(*strategy);
    auto check = [&](auto&& self, const StrategySpec& s) -> void {
        if (const auto* r = std::get_if<RegimeTriggeredDepletion>(&s.kind)) {
            for (auto a : r->trigger)
                if (a >= q.size()) throw Error(ErrorKind::RegimeOutOfRange, "trigger regime out of range");
        } else if (const auto* e = std::get_if<ThresholdExport>(&s.kind)) {
            if (e->regime >= q.size()) throw Error(ErrorKind::RegimeOutOfRange, "export regime out of range");
        } else if (const auto* c = std::get_if<Composite>(&s.kind)) {
            self(self, *c->first);
            self(self, *c->then);
        }
    };
    check(check, *strategy);
}

// Chooses how many base steps to merge: the largest power of two such that
// the state cannot reach the nearest monitored level except with negligible
// probability (8 sd of the Gaussian increment plus the drift).
class Coalescer {
public:
    Coalescer(const ModelSpec& model, const SimConfig& cfg) : dt_(cfg.dt), level_(cfg.extinction_level) {
        if (!cfg.coalesce) return;
        if (const auto* g = std::get_if<GbmCoefficients>(&model.kind())) {
            mode_ = Mode::Log;
            for (std::size_t a = 0; a < g->mu.size(); ++a)
                add(std::abs(g->sigma[a]), g->mu[a] - 0.5 * g->sigma[a] * g->sigma[a]);
        } else if (const auto* b = std::get_if<AbmCoefficients>(&model.kind())) {
            mode_ = Mode::Linear;
            for (std::size_t a = 0; a < b->drift.size(); ++a) add(std::abs(b->sigma[a]), b->drift[a]);
        }
    }

    std::uint64_t factor(const StrategySpec* strategy, const StrategyState& state, double x, Regime a) const {
        if (mode_ == Mode::Off) return 1;
        LevelBracket lv;
        if (strategy) lv = watch_levels(*strategy, state, x, a);
        const Per& c = per_[a];
        double d = std::numeric_limits<double>::infinity();
        if (mode_ == Mode::Log) {
            if (level_ > 0.0) lv.below = std::max(lv.below, level_);
            // Cheap rejection before taking logs: two base steps already too far.
            if (lv.above <= x * c.grow2 || (lv.below > 0.0 && x <= lv.below * c.grow2)) return 1;
            if (std::isfinite(lv.above)) d = std::log(lv.above / x);
            if (lv.below > 0.0) d = std::min(d, std::log(x / lv.below));
        } else {
            lv.below = std::max(lv.below, level_);
            if (std::isfinite(lv.above)) d = lv.above - x;
            d = std::min(d, x - lv.below);
        }
        if (std::isinf(d)) return kMaxCoalesce;
        if (!(d > c.reach2)) return 1;
        // Solve K sigma s + |nu| s^2 = d for s = sqrt(step).
        double s;
        if (c.abs_nu > 0.0) {
            s = 2.0 * d / (c.ks + std::sqrt(c.ks * c.ks + 4.0 * c.abs_nu * d));
        } else if (c.ks > 0.0) {
            s = d / c.ks;
        } else {
            return kMaxCoalesce;
        }
        const double fit = s * s / dt_;
        if (!(fit >= 2.0)) return 1;
        const auto k = fit >= static_cast<double>(kMaxCoalesce) ? kMaxCoalesce : static_cast<std::uint64_t>(fit);
        return std::bit_floor(k);
    }

private:
    enum class Mode { Off, Log, Linear };
    struct Per {
        double ks;      // K sigma
        double abs_nu;
        double reach2;  // excursion bound over two base steps
        double grow2;   // exp(reach2)
    };

    void add(double sigma, double nu) {
        Per c;
        c.ks = kCoalesceSigmas * sigma;
        c.abs_nu = std::abs(nu);
        c.reach2 = c.ks * std::sqrt(2.0 * dt_) + c.abs_nu * 2.0 * dt_;
        c.grow2 = std::exp(c.reach2);
        per_.push_back(c);
    }

    Mode mode_ = Mode::Off;
    double dt_;
    double level_;
    std::vector<Per> per_;
};

template <class Sink>
PathOutcome run_path(const ModelSpec& model, const GeneratorMatrix& q, const StrategySpec* strategy, double x0,
                     Regime a0, const SimConfig& cfg, Seed seed, bool negate, Sink& sink) {
    ChainCursor chain(q, a0, mix_seed(seed, 0, 1));
    NormalSource normal(mix_seed(seed, 0, 2), negate);
    StrategyState state = strategy ? initial_state(*strategy) : StrategyState{};

    const auto* gbm = std::get_if<GbmCoefficients>(&model.kind());
    const auto* abm = std::get_if<AbmCoefficients>(&model.kind());
    const double level = cfg.extinction_level;
    const double horizon = cfg.horizon;
    const Coalescer coalescer(model, cfg);

    PathOutcome out;
    double t = 0.0;
    double x = x0;
    Regime a = a0;
    double z = 0.0;
    std::uint64_t grid_index = 0;

    auto harvest_at = [&](Regime a_before) -> double {
        double dz_atom = 0.0;
        if (!strategy) return dz_atom;
        for (int iter = 0; iter < kMaxRequery; ++iter) {
            HarvestAction act;
            try {
                act = strategy_step(*strategy, state, t, x, a, horizon);
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::ScheduleUnderflow) throw Error(ErrorKind::StrategyScheduleOverflow, e.what());
                throw;
            }
            const double atom = std::clamp(act.atom, 0.0, x);
            if (atom > 0.0) {
                sink.harvest(HarvestEvent{t, atom, x, a_before, HarvestKind::Atom});
                x -= atom;
                z += atom;
                dz_atom += atom;
            }
            if (act.reflect_at && x > *act.reflect_at) {
                const double b = *act.reflect_at;
                const double dl = x - b;
                sink.harvest(HarvestEvent{t, dl, b, a, HarvestKind::Reflection});
                x = b;
                z += dl;
            }
            if (!act.requery) break;
        }
        return dz_atom;
    };

    auto record = [&](double dz_atom) {
        if constexpr (Sink::wants_points) sink.point(t, x, a, z, dz_atom);
    };

    auto extinct = [&]() {
        if (x <= level) {
            x = std::max(x, 0.0);
            out.tau = t;
            return true;
        }
        return false;
    };

    auto finish = [&]() {
        out.t = t;
        out.x = x;
        out.regime = a;
        out.exhausted = strategy ? exhausted(*strategy, state) : false;
        return out;
    };

    // Time zero: X(0-) = x0, alpha(0-) = alpha0.
    {
        const double dz = harvest_at(a);
        const bool dead = extinct();
        record(dz);
        if (dead) return finish();
        if (cfg.stop_when_exhausted && strategy && exhausted(*strategy, state)) return finish();
    }

    for (;;) {
        if (t >= horizon) {
            out.truncated = true;
            return finish();
        }
        const double jump = chain.next_jump();
        const double event = strategy ? next_event_time(*strategy, state) : std::numeric_limits<double>::infinity();
        const double cap = std::min({jump, event, horizon});
        const std::uint64_t k = coalescer.factor(strategy, state, x, a);
        const double grid_next = static_cast<double>(grid_index + k) * cfg.dt;
        double t_end;
        bool at_jump = false;
        if (grid_next <= cap + 1e-9 * cfg.dt) {
            t_end = std::min(grid_next, cap);
            grid_index += k;
            at_jump = (t_end == jump);
        } else {
            t_end = cap;
            at_jump = (cap == jump);
        }
        const double h = t_end - t;
        if (h > 0.0) {
            const double w = std::sqrt(h) * normal();
            if (gbm) {
                const double s = gbm->sigma[a];
                x *= std::exp((gbm->mu[a] - 0.5 * s * s) * h + s * w);
            } else if (abm) {
                x += abm->drift[a] * h + abm->sigma[a] * w;
            } else {
                x += drift(model, x, a) * h + diffusion(model, x, a) * w;
            }
        }
        t = t_end;
        const Regime a_before = a;
        if (at_jump) a = chain.advance();

        if (extinct()) {
            record(0.0);
            return finish();
        }
        const double dz = harvest_at(a_before);
        const bool dead = extinct();
        record(dz);
        if (dead) return finish();
        if (cfg.stop_when_exhausted && strategy && exhausted(*strategy, state)) return finish();
    }
}

}  // namespace harvest::detail
