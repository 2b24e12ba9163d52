#include "harvest/simulate.hpp"

#include <cstdio>
#include <ostream>

#include "path_engine.hpp"

namespace harvest {

namespace {

struct RecordingSink {
    static constexpr bool wants_points = true;
    HarvestedPath* path;

    void point(double t, double x, Regime a, double z, double dz_atom) {
        path->times.push_back(t);
        path->x.push_back(x);
        path->regime.push_back(a);
        path->z_cum.push_back(z);
        path->dz_atom.push_back(dz_atom);
    }
    void harvest(const HarvestEvent& e) { path->events.push_back(e); }
};

HarvestedPath run_recorded(const ModelSpec& model, const GeneratorMatrix& q, const StrategySpec* strategy, double x0,
                           Regime alpha0, const SimConfig& cfg) {
    detail::check_inputs(model, q, strategy, x0, alpha0, cfg);
    HarvestedPath path;
    RecordingSink sink{&path};
    const auto out = detail::run_path(model, q, strategy, x0, alpha0, cfg, cfg.seed, false, sink);
    path.tau = out.tau;
    path.truncated = out.truncated;
    path.exhausted = out.exhausted;
    return path;
}

}  // namespace

void validate_sim_config(const SimConfig& cfg) {
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
    if (!(cfg.horizon >= cfg.dt) || !std::isfinite(cfg.horizon)) {
        throw Error(ErrorKind::InvalidArgument, "horizon must be finite and at least dt");
    }
    if (!(cfg.extinction_level >= 0.0)) throw Error(ErrorKind::InvalidArgument, "extinction level must be >= 0");
}

std::vector<HarvestedPath::Jump> HarvestedPath::z_jumps() const {
    std::vector<Jump> out;
    for (std::size_t i = 0; i < times.size(); ++i)
        if (dz_atom[i] > 0.0) out.push_back({times[i], dz_atom[i]});
    return out;
}

HarvestedPath simulate_uncontrolled(const ModelSpec& model, const GeneratorMatrix& q, double x0, Regime alpha0,
                                    const SimConfig& cfg) {
    return run_recorded(model, q, nullptr, x0, alpha0, cfg);
}

HarvestedPath simulate_harvested(const ModelSpec& model, const GeneratorMatrix& q, const StrategySpec& strategy,
                                 [[maybe_unused]] const YieldFunction& f, double x0, Regime alpha0,
                                 const SimConfig& cfg) {
    return run_recorded(model, q, &strategy, x0, alpha0, cfg);
}

void write_path_csv(std::ostream& os, const HarvestedPath& path) {
    os << "t,x,regime,z_cum,dz_atom\n";
    char buf[160];
    for (std::size_t i = 0; i < path.times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%zu,%.17g,%.17g\n", path.times[i], path.x[i], path.regime[i] + 1,
                      path.z_cum[i], path.dz_atom[i]);
        os << buf;
    }
}

}  // namespace harvest
