#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "harvest/ctmc.hpp"
#include "harvest/model.hpp"
#include "harvest/rng.hpp"
#include "harvest/simulate.hpp"
#include "harvest/strategies.hpp"

namespace harvest {

struct McConfig {
    std::size_t n_paths = 1000;
    Seed base_seed = 0;
    bool antithetic = false;  // pairs (2j, 2j+1) share noise with opposite sign
    unsigned threads = 1;     // affects speed only
};

void validate_mc_config(const McConfig& mc);

struct PayoffEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    double truncated_fraction = 0.0;
    double tail_bound = 0.0;  // +inf when the truncated mass cannot be bounded
};

/// Discounted income of one path: atoms priced at (X(t-), alpha(t-)),
/// reflection increments at the barrier with the current regime.
double path_payoff(const HarvestedPath& path, const YieldFunction& f, double r);

/// Monte Carlo estimate of J(x0, alpha0, Z). Path i uses seed
/// mix_seed(base_seed, i) (mix_seed(base_seed, i / 2) under antithetics),
/// so results do not depend on the thread count.
PayoffEstimate estimate_J(const ModelSpec& model, const GeneratorMatrix& q, const StrategySpec& strategy,
                          const YieldFunction& f, double r, double x0, Regime alpha0, const SimConfig& sim,
                          const McConfig& mc);

/// Same paths, one estimate per yield function.
std::vector<PayoffEstimate> estimate_J_multi(const ModelSpec& model, const GeneratorMatrix& q,
                                             const StrategySpec& strategy, const std::vector<YieldFunction>& fs,
                                             double r, double x0, Regime alpha0, const SimConfig& sim,
                                             const McConfig& mc);

/// Bound on the discounted income lost by stopping surviving paths at the
/// horizon: (1/N) sum_truncated X_T e^{-rT} f_max r / (r - mu_max^+). Zero
/// without truncation, +inf when mu_max >= r or no growth rate is known.
struct TruncationStats {
    std::size_t n_paths = 0;
    std::size_t n_truncated = 0;
    double biomass_sum = 0.0;  // sum of X(T_max) over truncated paths
};
double tail_bound(const TruncationStats& stats, const YieldFunction& f, double r, double horizon,
                  std::optional<double> mu_max);

/// Fixed-shape pairwise summation; the result depends only on the values
/// and their order.
double pairwise_sum(std::span<const double> v);

std::string estimate_csv_header();
std::string estimate_csv_row(const std::string& scenario_id, double x0, Regime alpha0, const std::string& strategy,
                             const PayoffEstimate& e);

/// %.17g, with inf/-inf/nan spelled out.
std::string format_double(double v);

}  // namespace harvest
