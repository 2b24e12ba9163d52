#include "harvest/reference_suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

#include "harvest/analytic.hpp"
#include "harvest/error.hpp"
#include "harvest/payoff.hpp"
#include "harvest/qvi.hpp"

namespace harvest {

namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string g6(double v) { return fmt("%.6g", v); }

McConfig mc_for(const SuiteOptions& o, std::size_t default_paths, Seed default_seed) {
    McConfig mc;
    mc.n_paths = o.paths.value_or(default_paths);
    mc.base_seed = o.seed.value_or(default_seed);
    mc.threads = o.threads;
    return mc;
}

const Example1Params kCase1{0.05, 0.08, 0.3, 0.2, 1.0, 1.0, 0.1};
const Example1Params kCase2{0.05, 0.12, 0.3, 0.2, 1.0, 1.0, 0.1};
const Example1Params kCase3{0.05, 0.2, 0.3, 0.3, 1.0, 1.0, 0.1};
const Example2Params kExample2{{1.0, 1.5, std::sqrt(2.0), 2.0, 1.0, 1.0, 0.25}, 0.75};

CriterionResult c1(const SuiteOptions& o) {
    CriterionResult res{1, "case1_instant_depletion_exact", true, "", "", 0.0};
    const auto model = example_model(kCase1);
    const auto q = example_generator(kCase1);
    const auto f = YieldFunction::constant({1.0, 1.0});
    SimConfig sim;
    sim.dt = 1e-3;
    sim.horizon = 1.0;
    sim.stop_when_exhausted = true;
    const auto mc = mc_for(o, 1000, 101);
    const StrategySpec s{InstantDepletion{}};
    std::ostringstream csv, detail;
    csv << estimate_csv_header() << ",closed_form\n";
    const bool case1 = classify_example1(kCase1) == Example1Case::BothSubcritical;
    res.passed = case1;
    double worst = 0.0;
    for (double x0 : {0.5, 1.0, 5.0}) {
        for (Regime a : {Regime{0}, Regime{1}}) {
            const auto e = estimate_J(model, q, s, f, kCase1.r, x0, a, sim, mc);
            const double v = example1_value(kCase1, x0, a);
            csv << estimate_csv_row("case1", x0, a, describe(s), e) << ',' << format_double(v) << '\n';
            const double err = std::abs(e.mean - x0);
            worst = std::max(worst, err);
            if (!(err <= 1e-12 * x0) || e.std_error != 0.0 || v != x0) res.passed = false;
        }
    }
    detail << "max|J-x0|=" << g6(worst) << " zero_variance=" << (res.passed ? "yes" : "no");
    res.detail = detail.str();
    res.csv = csv.str();
    return res;
}

CriterionResult c2(const SuiteOptions& o) {
    CriterionResult res{2, "case2_regime_triggered_oracle", false, "", "", 0.0};
    const auto model = example_model(kCase2);
    const auto q = example_generator(kCase2);
    const auto f = YieldFunction::constant({1.0, 1.0});
    SimConfig sim;
    sim.dt = 1e-3;
    sim.horizon = 50.0;
    sim.stop_when_exhausted = true;
    const auto mc = mc_for(o, 100000, 202);
    const StrategySpec s{RegimeTriggeredDepletion{{0}}};
    const auto e = estimate_J(model, q, s, f, kCase2.r, 1.0, 1, sim, mc);
    const double phi = example1_value(kCase2, 1.0, 1);
    const double z = (e.mean - phi) / e.std_error;
    res.passed = std::abs(e.mean - phi) <= 3.0 * e.std_error && e.std_error < 0.01;
    res.detail = "J=" + g6(e.mean) + " phi=" + g6(phi) + " stderr=" + g6(e.std_error) + " z=" + fmt("%.3f", z);
    res.csv = estimate_csv_header() + ",closed_form\n" + estimate_csv_row("case2", 1.0, 1, describe(s), e) + ',' +
              format_double(phi) + '\n';
    return res;
}

CriterionResult c3(const SuiteOptions& o) {
    CriterionResult res{3, "example2_barrier_oracle", true, "", "", 0.0};
    const auto& p = kExample2.base;
    const auto model = example_model(p);
    const auto q = example_generator(p);
    const auto d = validate(kExample2);
    SimConfig sim;
    sim.dt = 1e-4;
    sim.horizon = 40.0;
    const auto mc = mc_for(o, 100000, 303);
    const StrategySpec s{Barrier{d.b, 0.0}};
    const std::vector<YieldFunction> fs{YieldFunction::power_decay(kExample2.gamma), YieldFunction::constant({1.0, 1.0})};
    const double phi = example2_value(kExample2, 1.0);
    const double lt = local_time_mean(1.0, d.p, d.b);
    std::ostringstream csv, detail;
    csv << estimate_csv_header() << ",quantity,closed_form\n";
    for (Regime a : {Regime{0}, Regime{1}}) {
        const auto e = estimate_J_multi(model, q, s, fs, p.r, 1.0, a, sim, mc);
        csv << estimate_csv_row("example2", 1.0, a, describe(s), e[0]) << ",J," << format_double(phi) << '\n';
        csv << estimate_csv_row("example2", 1.0, a, describe(s), e[1]) << ",local_time," << format_double(lt) << '\n';
        const bool okJ = std::abs(e[0].mean - phi) <= std::max(3.0 * e[0].std_error, 0.02 * phi);
        const bool okL = std::abs(e[1].mean - lt) <= std::max(3.0 * e[1].std_error, 0.02 * lt);
        res.passed = res.passed && okJ && okL;
        detail << "alpha0=" << a + 1 << ": J=" << g6(e[0].mean) << "(se " << g6(e[0].std_error) << ") L=" << g6(e[1].mean)
               << "(se " << g6(e[1].std_error) << "); ";
    }
    detail << "phi=" << g6(phi) << " L_exact=" << g6(lt);
    res.detail = detail.str();
    res.csv = csv.str();
    return res;
}

CriterionResult c4(const SuiteOptions& o) {
    CriterionResult res{4, "chattering_gap_trend", true, "", "", 0.0};
    const Example1Params p{0.0, 0.05, 0.3, 0.2, 1.0, 1.0, 0.1};
    const auto model = example_model(p);
    const auto q = example_generator(p);
    const auto f = YieldFunction::constant({1.0, 1.0});
    SimConfig sim;
    sim.dt = 1e-3;
    sim.horizon = 1.0;
    sim.stop_when_exhausted = true;
    const auto mc = mc_for(o, 100000, 404);
    const double g = g_integral(f, 1.0, 0);
    std::ostringstream csv, detail;
    csv << "alpha0,n,mean,stderr,gap\n";
    bool bounded = true;
    bool trend = true;
    for (Regime a : {Regime{0}, Regime{1}}) {
        double prev_gap = 0.0, prev_se = 0.0;
        bool first = true;
        for (std::size_t n : {1, 2, 4, 8, 16}) {
            const StrategySpec s{Chattering{n, 0.0}};
            const auto e = estimate_J(model, q, s, f, p.r, 1.0, a, sim, mc);
            const double gap = g - e.mean;
            csv << a + 1 << ',' << n << ',' << format_double(e.mean) << ',' << format_double(e.std_error) << ','
                << format_double(gap) << '\n';
            if (!(e.mean <= g + 3.0 * e.std_error)) bounded = false;
            if (!first && gap > prev_gap + 2.0 * std::hypot(prev_se, e.std_error)) {
                trend = false;
                detail << "alpha0=" << a + 1 << " n=" << n << " gap " << g6(gap) << " > previous " << g6(prev_gap)
                       << "; ";
            }
            prev_gap = gap;
            prev_se = e.std_error;
            first = false;
        }
    }
    res.passed = bounded && trend;
    detail << "J<=g+3se:" << (bounded ? "yes" : "no") << " gap_nonincreasing:" << (trend ? "yes" : "no");
    res.detail = detail.str();
    res.csv = csv.str();
    return res;
}

// Example-2 grid x_i = i * 20 / N for x_i >= 0.2, so b = 2 is a node.
GridFunction example2_grid(std::size_t N) {
    std::vector<double> grid;
    for (std::size_t i = N / 100; i <= N; ++i) grid.push_back(static_cast<double>(i) * 20.0 / static_cast<double>(N));
    auto phi = GridFunction::sample(grid, 2, [](double x, Regime) { return example2_value(kExample2, x); });
    phi.slopes = GridFunction::sample(grid, 2, [](double x, Regime) { return example2_slope(kExample2, x); }).values;
    return phi;
}

CriterionResult c5(const SuiteOptions&) {
    CriterionResult res{5, "qvi_residuals", true, "", "", 0.0};
    std::ostringstream csv, detail;
    csv << "check,points,h,max_violation,complementarity_gap,violation_points,partition_exact,complementarity_gap_x_ge_1\n";

    // Case 2 closed form on (0.1, 20].
    {
        const auto model = example_model(kCase2);
        const auto q = example_generator(kCase2);
        const auto f = YieldFunction::constant({1.0, 1.0});
        std::vector<double> grid;
        const std::size_t n = 2000;
        for (std::size_t i = 1; i <= n; ++i) grid.push_back(0.1 + 19.9 * static_cast<double>(i) / static_cast<double>(n));
        const auto phi = GridFunction::sample(grid, 2, [](double x, Regime a) { return example1_value(kCase2, x, a); });
        const auto rep = qvi_check(phi, model, q, f, kCase2.r);
        const bool ok = rep.max_violation < 1e-3 && rep.complementarity_gap < 1e-3;
        res.passed = res.passed && ok;
        csv << "case2," << n << ',' << format_double(19.9 / n) << ',' << format_double(rep.max_violation) << ','
            << format_double(rep.complementarity_gap) << ",,,\n";
        detail << "case2: max_violation=" << g6(rep.max_violation) << " gap=" << g6(rep.complementarity_gap) << "; ";
    }

    // Example 2 closed form: partition and convergence.
    {
        const auto& p = kExample2.base;
        const auto model = example_model(p);
        const auto q = example_generator(p);
        const auto f = YieldFunction::power_decay(kExample2.gamma);
        const double b = validate(kExample2).b;
        std::vector<double> hs, errs;
        bool partition = true;
        for (std::size_t N : {500, 1000, 2000}) {
            const auto phi = example2_grid(N);
            const auto rep = qvi_check(phi, model, q, f, p.r, 1e-10);
            bool exact = true;
            std::size_t violations = 0;
            // Convergence is read off x >= 1; the one-sided end stencil at 0.2 is still pre-asymptotic.
            double tail_gap = 0.0;
            for (std::size_t a = 0; a < 2; ++a) {
                for (std::size_t i = 0; i < phi.grid.size(); ++i) {
                    if (phi.grid[i] >= 1.0) {
                        const auto ra = static_cast<Eigen::Index>(a);
                        const auto ci = static_cast<Eigen::Index>(i);
                        tail_gap = std::max(tail_gap, std::min(std::abs(rep.pde_residual(ra, ci)),
                                                               std::abs(rep.gradient_residual(ra, ci))));
                    }
                    const Region want = phi.grid[i] < b ? Region::Continuation : Region::Harvest;
                    if (rep.region[a][i] == Region::Violation) ++violations;
                    if (rep.region[a][i] != want) exact = false;
                }
            }
            partition = partition && exact;
            const double h = 20.0 / static_cast<double>(N);
            hs.push_back(h);
            errs.push_back(tail_gap);
            csv << "example2," << phi.grid.size() << ',' << format_double(h) << ',' << format_double(rep.max_violation)
                << ',' << format_double(rep.complementarity_gap) << ',' << violations << ',' << (exact ? 1 : 0) << ',' << format_double(tail_gap) << '\n';
        }
        const double order = observed_order(hs, errs);
        csv << "example2_order,,,,,,," << format_double(order) << '\n';
        res.passed = res.passed && partition && order >= 1.7;
        detail << "example2: partition_exact=" << (partition ? "yes" : "no") << " order=" << fmt("%.3f", order);
    }
    res.detail = detail.str();
    res.csv = csv.str();
    return res;
}

CriterionResult c6(const SuiteOptions& o) {
    CriterionResult res{6, "quartic_roots_random_case3", true, "", "", 0.0};
    std::mt19937_64 rng(o.seed.value_or(606));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::ostringstream csv;
    csv << "draw,mu1,mu2,sigma1,sigma2,lambda1,lambda2,r,beta1,beta2,beta3,beta4,max_residual,ok\n";
    std::size_t failures = 0;
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        Example1Params p;
        p.r = 0.02 + 0.18 * u(rng);
        p.sigma1 = 0.1 + 0.5 * u(rng);
        p.sigma2 = 0.1 + 0.5 * u(rng);
        p.lambda1 = 0.2 + 2.8 * u(rng);
        p.lambda2 = 0.2 + 2.8 * u(rng);
        p.mu1 = p.r - (0.005 + 0.095 * u(rng));
        p.mu2 = xi_threshold(p) + 0.01 + 0.29 * u(rng);
        bool ok = true;
        QuarticRoots roots;
        try {
            roots = characteristic_roots(p);
        } catch (const Error&) {
            ok = false;
        }
        const double res_max = ok ? *std::max_element(roots.residual.begin(), roots.residual.end()) : INFINITY;
        const auto& b = roots.beta;
        ok = ok && res_max < 1e-9 && b[0] > b[1] && b[1] > 0.0 && 0.0 > b[2] && b[2] > b[3] && b[1] < 1.0;
        worst = std::max(worst, res_max);
        if (!ok) ++failures;
        csv << k << ',' << format_double(p.mu1) << ',' << format_double(p.mu2) << ',' << format_double(p.sigma1) << ','
            << format_double(p.sigma2) << ',' << format_double(p.lambda1) << ',' << format_double(p.lambda2) << ','
            << format_double(p.r) << ',' << format_double(b[0]) << ',' << format_double(b[1]) << ','
            << format_double(b[2]) << ',' << format_double(b[3]) << ',' << format_double(res_max) << ','
            << (ok ? 1 : 0) << '\n';
    }
    res.passed = failures == 0;
    res.detail = "draws=100 failures=" + std::to_string(failures) + " max_residual=" + g6(worst);
    res.csv = csv.str();
    return res;
}

CriterionResult c7(const SuiteOptions& o) {
    CriterionResult res{7, "case3_unbounded_signature", true, "", "", 0.0};
    const auto model = example_model(kCase3);
    const auto q = example_generator(kCase3);
    const auto f = YieldFunction::constant({1.0, 1.0});
    SimConfig sim;
    sim.dt = 1e-3;
    sim.horizon = 100.0;
    sim.stop_when_exhausted = true;
    const auto mc = mc_for(o, 20000, 707);
    std::ostringstream csv, detail;
    csv << estimate_csv_header() << ",M,lower_bound\n";
    double prev = 0.0, prev_se = 0.0;
    bool first = true;
    bool increasing = true, above = true;
    for (double M : {2.0, 4.0, 8.0}) {
        const StrategySpec s{ThresholdExport{M, 1}};
        const auto e = estimate_J(model, q, s, f, kCase3.r, 1.0, 0, sim, mc);
        // c -> 0+ gives the smallest (still valid) bound.
        const double lb = case3_lower_bound(kCase3, 1.0, M, 1e-12).regime1;
        csv << estimate_csv_row("case3", 1.0, 0, describe(s), e) << ',' << format_double(M) << ','
            << format_double(lb) << '\n';
        if (!first && !(e.mean - prev > 2.0 * std::hypot(e.std_error, prev_se))) increasing = false;
        if (!(e.mean >= lb - 3.0 * e.std_error)) above = false;
        detail << "M=" << g6(M) << ": J=" << g6(e.mean) << "(se " << g6(e.std_error) << ") bound=" << g6(lb) << "; ";
        prev = e.mean;
        prev_se = e.std_error;
        first = false;
    }
    res.passed = increasing && above;
    detail << "increasing:" << (increasing ? "yes" : "no") << " above_bound:" << (above ? "yes" : "no");
    res.detail = detail.str();
    res.csv = csv.str();
    return res;
}

// Wall-clock budgets in seconds.
double runtime_limit(int id) {
    switch (id) {
        case 1: return 1.0;
        case 2: return 60.0;
        case 3: return 600.0;
        case 4: return 300.0;
        case 5: return 10.0;
        case 6: return 5.0;
        case 7: return 600.0;
        default: return INFINITY;
    }
}

CriterionResult timed(int id, const SuiteOptions& o) {
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    switch (id) {
        case 1: r = c1(o); break;
        case 2: r = c2(o); break;
        case 3: r = c3(o); break;
        case 4: r = c4(o); break;
        case 5: r = c5(o); break;
        case 6: r = c6(o); break;
        case 7: r = c7(o); break;
        default: throw Error(ErrorKind::InvalidArgument, "criterion id must be 1-8");
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double limit = runtime_limit(id);
    if (r.seconds > limit) {
        r.passed = false;
        r.detail += "; runtime " + g6(r.seconds) + " s over the " + g6(limit) + " s budget";
    }
    return r;
}

CriterionResult c8(const SuiteOptions& o, const std::map<int, CriterionResult>& done) {
    CriterionResult res{8, "thread_count_invariance", true, "", "", 0.0};
    std::ostringstream detail, csv;
    csv << "criterion,threads_1_bytes,threads_4_bytes,identical\n";
    for (int id : {2, 3, 4}) {
        std::map<unsigned, std::string> out;
        const auto it = done.find(id);
        if (it != done.end() && (o.threads == 1 || o.threads == 4)) out[o.threads] = it->second.csv;
        for (unsigned t : {1u, 4u}) {
            if (out.count(t)) continue;
            SuiteOptions so = o;
            so.threads = t;
            out[t] = timed(id, so).csv;
        }
        const bool same = out[1] == out[4];
        res.passed = res.passed && same;
        csv << id << ',' << out[1].size() << ',' << out[4].size() << ',' << (same ? 1 : 0) << '\n';
        detail << "C" << id << ":" << (same ? "identical" : "DIFFERENT") << ' ';
    }
    res.detail = detail.str();
    res.csv = csv.str();
    return res;
}

}  // namespace

CriterionResult run_criterion(int id, const SuiteOptions& opts) {
    if (id == 8) {
        const auto t0 = std::chrono::steady_clock::now();
        auto r = c8(opts, {});
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return r;
    }
    return timed(id, opts);
}

std::vector<CriterionResult> run_reference_suite(const SuiteOptions& opts, const std::vector<int>& ids) {
    std::vector<int> which = ids.empty() ? std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8} : ids;
    std::vector<CriterionResult> out;
    std::map<int, CriterionResult> done;
    for (int id : which) {
        if (id == 8) {
            const auto t0 = std::chrono::steady_clock::now();
            auto r = c8(opts, done);
            r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            out.push_back(r);
        } else {
            auto r = timed(id, opts);
            done[id] = r;
            out.push_back(r);
        }
    }
    return out;
}

std::string suite_summary_csv(const std::vector<CriterionResult>& results) {
    std::ostringstream os;
    os << "id,name,passed,detail\n";
    for (const auto& r : results) {
        std::string d = r.detail;
        std::replace(d.begin(), d.end(), ',', ';');
        os << r.id << ',' << r.name << ',' << (r.passed ? "true" : "false") << ",\"" << d << "\"\n";
    }
    return os.str();
}

}  // namespace harvest
