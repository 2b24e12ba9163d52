#pragma once

#include <cmath>
#include <vector>

#include "harvest/model.hpp"
#include "harvest/simulate.hpp"

namespace harvest::detail {

// Accumulates discounted income under several yield functions at once.
struct IncomeSink {
    static constexpr bool wants_points = false;
    const std::vector<YieldFunction>* fs;
    double r;
    std::vector<double> income;

    IncomeSink(const std::vector<YieldFunction>& yields, double rate)
        : fs(&yields), r(rate), income(yields.size(), 0.0) {}

    void point(double, double, Regime, double, double) {}
    void harvest(const HarvestEvent& e) {
        const double disc = std::exp(-r * e.t);
        for (std::size_t k = 0; k < fs->size(); ++k) income[k] += disc * yield_eval((*fs)[k], e.x, e.regime) * e.amount;
    }
};

// Seed and antithetic sign of path i.
inline std::pair<Seed, bool> path_seed(Seed base, std::size_t i, bool antithetic) {
    if (antithetic) return {mix_seed(base, i / 2), (i % 2) == 1};
    return {mix_seed(base, i), false};
}

}  // namespace harvest::detail
