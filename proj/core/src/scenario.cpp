#include "harvest/scenario.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "harvest/error.hpp"

#ifndef HARVEST_BUILD_FINGERPRINT
#define HARVEST_BUILD_FINGERPRINT "unknown"
#endif

namespace harvest {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw Error(ErrorKind::ConfigParse, (path.empty() ? std::string("<root>") : path) + ": " + what);
}

// Read-only view of a JSON node that knows its key path.
class Node {
public:
    Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

    const std::string& path() const { return path_; }
    const json& raw() const { return *j_; }

    Node at(const std::string& key) const {
        expect_object();
        const auto it = j_->find(key);
        if (it == j_->end()) fail(child(key), "missing required key");
        return Node(*it, child(key));
    }
    std::optional<Node> find(const std::string& key) const {
        expect_object();
        const auto it = j_->find(key);
        if (it == j_->end() || it->is_null()) return std::nullopt;
        return Node(*it, child(key));
    }
    Node index(std::size_t i) const { return Node((*j_)[i], path_ + "[" + std::to_string(i) + "]"); }
    std::size_t size() const {
        if (!j_->is_array()) fail(path_, "expected an array");
        return j_->size();
    }

    void allow_keys(std::initializer_list<const char*> keys) const {
        expect_object();
        std::set<std::string> ok(keys.begin(), keys.end());
        for (auto it = j_->begin(); it != j_->end(); ++it) {
            if (!ok.count(it.key())) fail(child(it.key()), "unknown key");
        }
    }

    double number() const {
        if (!j_->is_number()) fail(path_, "expected a number");
        return j_->get<double>();
    }
    std::uint64_t unsigned_integer() const {
        if (!j_->is_number_unsigned() && !(j_->is_number_integer() && j_->get<std::int64_t>() >= 0)) {
            fail(path_, "expected a nonnegative integer");
        }
        return j_->get<std::uint64_t>();
    }
    bool boolean() const {
        if (!j_->is_boolean()) fail(path_, "expected true or false");
        return j_->get<bool>();
    }
    std::string string() const {
        if (!j_->is_string()) fail(path_, "expected a string");
        return j_->get<std::string>();
    }
    std::vector<double> numbers() const {
        std::vector<double> out;
        for (std::size_t i = 0; i < size(); ++i) out.push_back(index(i).number());
        return out;
    }
    std::vector<std::vector<double>> matrix() const {
        std::vector<std::vector<double>> out;
        for (std::size_t i = 0; i < size(); ++i) out.push_back(index(i).numbers());
        return out;
    }
    Regime regime_label() const {
        const auto v = unsigned_integer();
        if (v < 1) fail(path_, "regime labels start at 1");
        return static_cast<Regime>(v - 1);
    }

private:
    void expect_object() const {
        if (!j_->is_object()) fail(path_, "expected an object");
    }
    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* j_;
    std::string path_;
};

template <class Fn>
auto rethrow_at(const Node& n, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ConfigParse || e.kind() == ErrorKind::DimensionMismatch) throw;
        fail(n.path(), e.what());
    }
}

ModelSpec parse_model(const Node& n) {
    const auto type = n.at("type").string();
    if (type == "gbm") {
        n.allow_keys({"type", "mu", "sigma"});
        return rethrow_at(n, [&] { return ModelSpec::gbm(n.at("mu").numbers(), n.at("sigma").numbers()); });
    }
    if (type == "abm") {
        n.allow_keys({"type", "drift", "sigma"});
        return rethrow_at(n, [&] { return ModelSpec::abm(n.at("drift").numbers(), n.at("sigma").numbers()); });
    }
    if (type == "tabulated") {
        n.allow_keys({"type", "x", "drift", "diffusion"});
        CoefficientTable t{n.at("x").numbers(), n.at("drift").matrix(), n.at("diffusion").matrix()};
        return rethrow_at(n, [&] { return ModelSpec::tabulated(std::move(t)); });
    }
    fail(n.at("type").path(), "unknown model type '" + type + "' (gbm, abm, tabulated)");
}

json model_json(const ModelSpec& m) {
    json j;
    if (const auto* g = std::get_if<GbmCoefficients>(&m.kind())) {
        j["type"] = "gbm";
        j["mu"] = g->mu;
        j["sigma"] = g->sigma;
    } else if (const auto* a = std::get_if<AbmCoefficients>(&m.kind())) {
        j["type"] = "abm";
        j["drift"] = a->drift;
        j["sigma"] = a->sigma;
    } else {
        const auto& t = std::get<TabulatedCoefficients>(m.kind());
        if (!t.table) throw Error(ErrorKind::InvalidArgument, "only knot-table models can be serialized");
        j["type"] = "tabulated";
        j["x"] = t.table->x;
        j["drift"] = t.table->drift;
        j["diffusion"] = t.table->diffusion;
    }
    return j;
}

YieldFunction parse_yield(const Node& n) {
    const auto type = n.at("type").string();
    if (type == "constant") {
        n.allow_keys({"type", "price"});
        return rethrow_at(n, [&] { return YieldFunction::constant(n.at("price").numbers()); });
    }
    if (type == "power_decay") {
        n.allow_keys({"type", "gamma"});
        return rethrow_at(n, [&] { return YieldFunction::power_decay(n.at("gamma").number()); });
    }
    fail(n.at("type").path(), "unknown yield type '" + type + "' (constant, power_decay)");
}

json yield_json(const YieldFunction& f) {
    json j;
    if (const auto* c = std::get_if<ConstantPerRegimeYield>(&f.kind())) {
        j["type"] = "constant";
        j["price"] = c->price;
    } else {
        j["type"] = "power_decay";
        j["gamma"] = std::get<PowerDecayYield>(f.kind()).gamma;
    }
    return j;
}

StrategySpec parse_strategy_node(const Node& n) {
    const auto type = n.at("type").string();
    StrategySpec s;
    if (type == "no_harvest") {
        n.allow_keys({"type"});
        s.kind = NoHarvest{};
    } else if (type == "instant_depletion") {
        n.allow_keys({"type"});
        s.kind = InstantDepletion{};
    } else if (type == "chattering") {
        n.allow_keys({"type", "n", "target"});
        Chattering c;
        c.n = n.at("n").unsigned_integer();
        if (auto t = n.find("target")) c.target = t->number();
        s.kind = c;
    } else if (type == "regime_triggered_depletion") {
        n.allow_keys({"type", "trigger"});
        RegimeTriggeredDepletion r;
        const auto t = n.at("trigger");
        for (std::size_t i = 0; i < t.size(); ++i) r.trigger.push_back(t.index(i).regime_label());
        s.kind = r;
    } else if (type == "barrier") {
        n.allow_keys({"type", "level", "rho"});
        Barrier b;
        b.level = n.at("level").number();
        b.rho = 1e-3 * b.level;
        if (auto r = n.find("rho")) b.rho = r->number();
        s.kind = b;
    } else if (type == "threshold_export") {
        n.allow_keys({"type", "level", "regime"});
        s.kind = ThresholdExport{n.at("level").number(), n.at("regime").regime_label()};
    } else if (type == "composite") {
        n.allow_keys({"type", "first", "switch_level", "then"});
        s = make_composite(parse_strategy_node(n.at("first")), n.at("switch_level").number(),
                           parse_strategy_node(n.at("then")));
    } else {
        fail(n.at("type").path(), "unknown strategy type '" + type + "'");
    }
    rethrow_at(n, [&] {
        validate_strategy(s);
        return 0;
    });
    return s;
}

json strategy_json(const StrategySpec& s) {
    json j;
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, NoHarvest>) {
                j["type"] = "no_harvest";
            } else if constexpr (std::is_same_v<T, InstantDepletion>) {
                j["type"] = "instant_depletion";
            } else if constexpr (std::is_same_v<T, Chattering>) {
                j["type"] = "chattering";
                j["n"] = k.n;
                j["target"] = k.target;
            } else if constexpr (std::is_same_v<T, RegimeTriggeredDepletion>) {
                j["type"] = "regime_triggered_depletion";
                json t = json::array();
                for (auto a : k.trigger) t.push_back(a + 1);
                j["trigger"] = t;
            } else if constexpr (std::is_same_v<T, Barrier>) {
                j["type"] = "barrier";
                j["level"] = k.level;
                j["rho"] = k.rho;
            } else if constexpr (std::is_same_v<T, ThresholdExport>) {
                j["type"] = "threshold_export";
                j["level"] = k.level;
                j["regime"] = k.regime + 1;
            } else {
                j["type"] = "composite";
                j["first"] = strategy_json(*k.first);
                j["switch_level"] = k.switch_level;
                j["then"] = strategy_json(*k.then);
            }
        },
        s.kind);
    return j;
}

Regime max_strategy_regime(const StrategySpec& s) {
    Regime out = 0;
    if (const auto* r = std::get_if<RegimeTriggeredDepletion>(&s.kind)) {
        for (auto a : r->trigger) out = std::max(out, a);
    } else if (const auto* e = std::get_if<ThresholdExport>(&s.kind)) {
        out = e->regime;
    } else if (const auto* c = std::get_if<Composite>(&s.kind)) {
        out = std::max(max_strategy_regime(*c->first), max_strategy_regime(*c->then));
    }
    return out;
}

json parse_json_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::ostringstream os;
        os << "byte " << e.byte << ": " << e.what();
        throw Error(ErrorKind::ConfigParse, os.str());
    }
}

std::string reference_name(Reference r) {
    switch (r) {
        case Reference::Example1: return "example1";
        case Reference::Example2: return "example2";
        default: return "none";
    }
}

Scenario parse_root(const Node& root) {
    root.allow_keys({"id", "model", "generator", "yield", "r", "strategy", "x0", "alpha0", "sim", "mc", "checks",
                     "reference", "qvi", "dpp"});
    Scenario s;
    s.id = root.at("id").string();
    s.model = parse_model(root.at("model"));
    {
        const auto g = root.at("generator");
        const auto rows = g.matrix();
        s.q = rethrow_at(g, [&] { return validate_generator(rows); });
    }
    s.yield = parse_yield(root.at("yield"));
    s.r = root.at("r").number();
    if (!(s.r >= 0.0)) fail(root.at("r").path(), "discount rate must be >= 0");
    s.strategy = parse_strategy_node(root.at("strategy"));
    s.x0 = root.at("x0").numbers();
    if (s.x0.empty()) fail(root.at("x0").path(), "need at least one initial population");
    for (std::size_t i = 0; i < s.x0.size(); ++i)
        if (!(s.x0[i] > 0.0)) fail(root.at("x0").index(i).path(), "initial population must be positive");
    {
        const auto a = root.at("alpha0");
        if (a.size() == 0) fail(a.path(), "need at least one initial regime");
        for (std::size_t i = 0; i < a.size(); ++i) s.alpha0.push_back(a.index(i).regime_label());
    }
    if (auto sim = root.find("sim")) {
        sim->allow_keys({"dt", "horizon", "extinction_level", "seed", "coalesce"});
        if (auto v = sim->find("dt")) s.sim.dt = v->number();
        if (auto v = sim->find("horizon")) s.sim.horizon = v->number();
        if (auto v = sim->find("extinction_level")) s.sim.extinction_level = v->number();
        if (auto v = sim->find("seed")) s.sim.seed = v->unsigned_integer();
        if (auto v = sim->find("coalesce")) s.sim.coalesce = v->boolean();
        rethrow_at(*sim, [&] {
            validate_sim_config(s.sim);
            return 0;
        });
    }
    if (auto mc = root.find("mc")) {
        mc->allow_keys({"n_paths", "base_seed", "antithetic"});
        if (auto v = mc->find("n_paths")) s.mc.n_paths = v->unsigned_integer();
        if (auto v = mc->find("base_seed")) s.mc.base_seed = v->unsigned_integer();
        if (auto v = mc->find("antithetic")) s.mc.antithetic = v->boolean();
        rethrow_at(*mc, [&] {
            validate_mc_config(s.mc);
            return 0;
        });
    }
    if (auto checks = root.find("checks")) {
        for (std::size_t i = 0; i < checks->size(); ++i) {
            const auto c = checks->index(i).string();
            if (c != "qvi" && c != "g_condition" && c != "lyapunov" && c != "dpp") {
                fail(checks->index(i).path(), "unknown check '" + c + "' (qvi, g_condition, lyapunov, dpp)");
            }
            s.checks.push_back(c);
        }
    }
    if (auto ref = root.find("reference")) {
        const auto r = ref->string();
        if (r == "example1") {
            s.reference = Reference::Example1;
        } else if (r == "example2") {
            s.reference = Reference::Example2;
        } else if (r != "none") {
            fail(ref->path(), "unknown reference '" + r + "' (example1, example2, none)");
        }
    }
    if (auto q = root.find("qvi")) {
        q->allow_keys({"lo", "hi", "points", "tol"});
        if (auto v = q->find("lo")) s.qvi.lo = v->number();
        if (auto v = q->find("hi")) s.qvi.hi = v->number();
        if (auto v = q->find("points")) s.qvi.points = v->unsigned_integer();
        if (auto v = q->find("tol")) s.qvi.tol = v->number();
        if (!(s.qvi.lo > 0.0 && s.qvi.hi > s.qvi.lo)) fail(q->path(), "need 0 < lo < hi");
        if (s.qvi.points < 5) fail(q->path(), "need at least 5 grid points");
    }
    if (auto d = root.find("dpp")) {
        d->allow_keys({"eta", "family"});
        if (auto v = d->find("eta")) s.dpp.eta = v->number();
        if (auto f = d->find("family"))
            for (std::size_t i = 0; i < f->size(); ++i) s.dpp.family.push_back(parse_strategy_node(f->index(i)));
    }

    // Cross-references.
    const std::size_t m = s.model.regimes();
    if (s.q.size() != m) {
        throw Error(ErrorKind::DimensionMismatch, "generator is " + std::to_string(s.q.size()) + "x" +
                                                      std::to_string(s.q.size()) + " but the model has " +
                                                      std::to_string(m) + " regimes");
    }
    if (const auto* c = std::get_if<ConstantPerRegimeYield>(&s.yield.kind()); c && c->price.size() != m) {
        throw Error(ErrorKind::DimensionMismatch, "yield.price needs one entry per regime");
    }
    for (auto a : s.alpha0)
        if (a >= m) throw Error(ErrorKind::DimensionMismatch, "alpha0 label " + std::to_string(a + 1) + " exceeds m");
    if (max_strategy_regime(s.strategy) >= m) {
        throw Error(ErrorKind::DimensionMismatch, "strategy refers to a regime beyond m");
    }
    for (const auto& f : s.dpp.family)
        if (max_strategy_regime(f) >= m) throw Error(ErrorKind::DimensionMismatch, "dpp family regime beyond m");
    return s;
}

json scenario_json(const Scenario& s) {
    json j;
    j["id"] = s.id;
    j["model"] = model_json(s.model);
    json rows = json::array();
    for (std::size_t i = 0; i < s.q.size(); ++i) {
        json row = json::array();
        for (std::size_t k = 0; k < s.q.size(); ++k) row.push_back(s.q.rate(i, k));
        rows.push_back(row);
    }
    j["generator"] = rows;
    j["yield"] = yield_json(s.yield);
    j["r"] = s.r;
    j["strategy"] = strategy_json(s.strategy);
    j["x0"] = s.x0;
    json a = json::array();
    for (auto v : s.alpha0) a.push_back(v + 1);
    j["alpha0"] = a;
    j["sim"] = {{"dt", s.sim.dt},
                {"horizon", s.sim.horizon},
                {"extinction_level", s.sim.extinction_level},
                {"seed", s.sim.seed},
                {"coalesce", s.sim.coalesce}};
    j["mc"] = {{"n_paths", s.mc.n_paths}, {"base_seed", s.mc.base_seed}, {"antithetic", s.mc.antithetic}};
    j["checks"] = s.checks;
    j["reference"] = reference_name(s.reference);
    json qv = {{"lo", s.qvi.lo}, {"hi", s.qvi.hi}, {"points", s.qvi.points}};
    qv["tol"] = s.qvi.tol ? json(*s.qvi.tol) : json(nullptr);
    j["qvi"] = qv;
    json fam = json::array();
    for (const auto& f : s.dpp.family) fam.push_back(strategy_json(f));
    j["dpp"] = {{"eta", s.dpp.eta}, {"family", fam}};
    return j;
}

std::string utc_stamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
    return os.str();
}

}  // namespace

bool same_model(const ModelSpec& a, const ModelSpec& b) {
    if (a.regimes() != b.regimes() || a.kind().index() != b.kind().index()) return false;
    if (const auto* g = std::get_if<GbmCoefficients>(&a.kind())) {
        const auto& h = std::get<GbmCoefficients>(b.kind());
        return g->mu == h.mu && g->sigma == h.sigma;
    }
    if (const auto* g = std::get_if<AbmCoefficients>(&a.kind())) {
        const auto& h = std::get<AbmCoefficients>(b.kind());
        return g->drift == h.drift && g->sigma == h.sigma;
    }
    const auto& ta = std::get<TabulatedCoefficients>(a.kind()).table;
    const auto& tb = std::get<TabulatedCoefficients>(b.kind()).table;
    return ta && tb && *ta == *tb;
}

bool same_yield(const YieldFunction& a, const YieldFunction& b) {
    if (a.kind().index() != b.kind().index()) return false;
    if (const auto* c = std::get_if<ConstantPerRegimeYield>(&a.kind()))
        return c->price == std::get<ConstantPerRegimeYield>(b.kind()).price;
    return std::get<PowerDecayYield>(a.kind()).gamma == std::get<PowerDecayYield>(b.kind()).gamma;
}

bool operator==(const Scenario& a, const Scenario& b) {
    return a.id == b.id && same_model(a.model, b.model) && a.q.rates() == b.q.rates() && same_yield(a.yield, b.yield) &&
           a.r == b.r && a.strategy == b.strategy && a.x0 == b.x0 && a.alpha0 == b.alpha0 && a.sim.dt == b.sim.dt &&
           a.sim.horizon == b.sim.horizon && a.sim.extinction_level == b.sim.extinction_level &&
           a.sim.seed == b.sim.seed && a.sim.coalesce == b.sim.coalesce && a.mc.n_paths == b.mc.n_paths &&
           a.mc.base_seed == b.mc.base_seed && a.mc.antithetic == b.mc.antithetic && a.checks == b.checks &&
           a.reference == b.reference && a.qvi == b.qvi && a.dpp == b.dpp;
}

Scenario parse_scenario(const std::string& text) {
    const json j = parse_json_text(text);
    return parse_root(Node(j, ""));
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigParse, "cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    try {
        return parse_scenario(os.str());
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + std::string(e.what()).substr(std::string(to_string(e.kind())).size() + 2));
    }
}

std::string serialize_scenario(const Scenario& s) { return scenario_json(s).dump(2); }

StrategySpec parse_strategy(const std::string& json_text) {
    const json j = parse_json_text(json_text);
    return parse_strategy_node(Node(j, "strategy"));
}

std::string serialize_strategy(const StrategySpec& s) { return strategy_json(s).dump(); }

Example1Params example1_params(const Scenario& s) {
    const auto* g = std::get_if<GbmCoefficients>(&s.model.kind());
    if (!g || s.model.regimes() != 2) fail("model", "the example-1 reference needs a two-regime gbm model");
    const auto* c = std::get_if<ConstantPerRegimeYield>(&s.yield.kind());
    if (!c || c->price[0] != 1.0 || c->price[1] != 1.0) fail("yield", "the example-1 reference needs f = 1");
    Example1Params p{g->mu[0], g->mu[1], g->sigma[0], g->sigma[1], s.q.rate(0, 1), s.q.rate(1, 0), s.r};
    try {
        validate(p);
    } catch (const Error& e) {
        fail("model", e.what());
    }
    return p;
}

Example2Params example2_params(const Scenario& s) {
    const auto* g = std::get_if<GbmCoefficients>(&s.model.kind());
    if (!g || s.model.regimes() != 2) fail("model", "the example-2 reference needs a two-regime gbm model");
    const auto* y = std::get_if<PowerDecayYield>(&s.yield.kind());
    if (!y) fail("yield", "the example-2 reference needs a power_decay yield");
    Example2Params p{{g->mu[0], g->mu[1], g->sigma[0], g->sigma[1], s.q.rate(0, 1), s.q.rate(1, 0), s.r}, y->gamma};
    try {
        validate(p);
    } catch (const Error& e) {
        fail("model", e.what());
    }
    return p;
}

std::optional<double> reference_value(const Scenario& s, double x, Regime a) {
    switch (s.reference) {
        case Reference::Example1: return example1_value(example1_params(s), x, a);
        case Reference::Example2: return example2_value(example2_params(s), x);
        default: return std::nullopt;
    }
}

std::string analytic_report_json(const Scenario& s) {
    json j;
    j["scenario_id"] = s.id;
    j["reference"] = reference_name(s.reference);
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(v > 0 ? "inf" : "-inf"); };
    if (s.reference == Reference::Example1) {
        const auto p = example1_params(s);
        j["xi"] = xi_threshold(p);
        try {
            j["case"] = std::string(to_string(classify_example1(p)));
        } catch (const Error& e) {
            j["case"] = e.what();
        }
        json vals = json::array();
        for (double x : s.x0)
            for (Regime a = 0; a < 2; ++a) {
                double v;
                try {
                    v = example1_value(p, x, a);
                } catch (const Error&) {
                    continue;
                }
                vals.push_back({{"x", x}, {"alpha", a + 1}, {"value", num(v)}});
            }
        j["values"] = vals;
        try {
            const auto roots = characteristic_roots(p);
            j["beta"] = roots.beta;
            j["residual"] = roots.residual;
            j["quartic_coefficients"] = roots.coeffs;
            json bounds = json::array();
            const double x = s.x0.front();
            for (double M : {2.0 * x, 4.0 * x, 8.0 * x}) {
                const auto b = case3_lower_bound(p, x, M, 1e-12);
                bounds.push_back({{"x", x}, {"M", M}, {"c", 1e-12}, {"l1", b.l1}, {"l2", b.l2}, {"C1", b.C1},
                                  {"C2", b.C2}, {"regime1", b.regime1}, {"regime2", b.regime2}});
            }
            j["export_lower_bounds"] = bounds;
        } catch (const Error& e) {
            j["roots_error"] = e.what();
        }
    } else if (s.reference == Reference::Example2) {
        const auto p2 = example2_params(s);
        const auto& p = p2.base;
        j["p1"] = positive_root_p(p.mu1, p.sigma1 * p.sigma1, p.r);
        j["p2"] = positive_root_p(p.mu2, p.sigma2 * p.sigma2, p.r);
        const auto d = validate(p2);
        j["p"] = d.p;
        j["b"] = d.b;
        j["g1_at_p"] = gi_eval(p, 0, d.p);
        j["g2_at_p"] = gi_eval(p, 1, d.p);
        json vals = json::array();
        for (double x : s.x0) {
            json row = {{"x", x}, {"value", example2_value(p2, x)}, {"slope", example2_slope(p2, x)}};
            if (x <= d.b) row["local_time_mean"] = local_time_mean(x, d.p, d.b);
            vals.push_back(row);
        }
        j["values"] = vals;
    }
    return j.dump(2);
}

std::vector<ScenarioRow> run_scenario_estimates(const Scenario& s) {
    std::vector<ScenarioRow> rows;
    SimConfig sim = s.sim;
    sim.stop_when_exhausted = true;
    for (double x : s.x0) {
        for (Regime a : s.alpha0) {
            ScenarioRow row;
            row.x0 = x;
            row.alpha0 = a;
            row.estimate = estimate_J(s.model, s.q, s.strategy, s.yield, s.r, x, a, sim, s.mc);
            row.closed_form = reference_value(s, x, a);
            if (row.closed_form && std::isfinite(*row.closed_form)) {
                const double diff = row.estimate.mean - *row.closed_form;
                if (row.estimate.std_error > 0.0) {
                    row.z_score = diff / row.estimate.std_error;
                } else {
                    row.z_score = std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(*row.closed_form))
                                      ? 0.0
                                      : std::copysign(std::numeric_limits<double>::infinity(), diff);
                }
            }
            rows.push_back(row);
        }
    }
    return rows;
}

std::string scenario_table_csv(const std::vector<ScenarioRow>& rows) {
    std::ostringstream os;
    os << "x0,alpha0,J_mc,stderr,phi_closed,z_score\n";
    for (const auto& r : rows) {
        os << format_double(r.x0) << ',' << r.alpha0 + 1 << ',' << format_double(r.estimate.mean) << ','
           << format_double(r.estimate.std_error) << ',' << (r.closed_form ? format_double(*r.closed_form) : "")
           << ',' << (r.z_score ? format_double(*r.z_score) : "") << '\n';
    }
    return os.str();
}

std::filesystem::path write_run_record(const std::filesystem::path& dir, const Scenario& s,
                                       const std::string& command, const std::string& results_json) {
    std::filesystem::create_directories(dir);
    const std::string stamp = utc_stamp();
    json rec;
    rec["scenario_id"] = s.id;
    rec["command"] = command;
    rec["timestamp"] = stamp;
    rec["fingerprint"] = build_fingerprint();
    rec["seed"] = s.mc.base_seed;
    rec["sim_seed"] = s.sim.seed;
    rec["config"] = scenario_json(s);
    rec["results"] = results_json.empty() ? json(nullptr) : json::parse(results_json);
    for (int k = 0;; ++k) {
        std::ostringstream name;
        name << s.id << '-' << stamp << '-' << std::setw(3) << std::setfill('0') << k << ".json";
        const auto path = dir / name.str();
        if (std::filesystem::exists(path)) continue;
        std::ofstream out(path);
        if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
        out << rec.dump(2) << '\n';
        return path;
    }
}

std::string build_fingerprint() { return HARVEST_BUILD_FINGERPRINT; }

}  // namespace harvest
