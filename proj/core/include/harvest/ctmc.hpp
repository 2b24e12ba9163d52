#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "harvest/rng.hpp"

namespace harvest {

/// Zero-based index into the environment's state space.
using Regime = std::size_t;

/// Validated rate matrix of the environment chain. Off-diagonal rates are
/// nonnegative, rows sum to zero and every diagonal is strictly negative
/// when m > 1. A single regime is represented by the 1x1 zero matrix.
class GeneratorMatrix {
public:
    std::size_t size() const noexcept { return static_cast<std::size_t>(rates_.rows()); }
    double rate(Regime i, Regime j) const { return rates_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); }
    /// Total jump intensity -q_ii out of regime i.
    double exit_rate(Regime i) const { return -rate(i, i); }
    const Eigen::MatrixXd& rates() const noexcept { return rates_; }

    friend GeneratorMatrix validate_generator(const Eigen::MatrixXd& rates);

private:
    explicit GeneratorMatrix(Eigen::MatrixXd rates) : rates_(std::move(rates)) {}
    Eigen::MatrixXd rates_;
};

/// Checks a candidate rate matrix and folds row-sum noise up to 1e-9 back
/// onto the diagonal. Throws NegativeOffDiagonal, RowSumTooLarge or
/// NonAbsorbingRowViolation.
GeneratorMatrix validate_generator(const Eigen::MatrixXd& rates);

/// Convenience overload for row-major nested vectors (config input).
GeneratorMatrix validate_generator(const std::vector<std::vector<double>>& rows);

/// Two-regime generator [[-l1, l1], [l2, -l2]].
GeneratorMatrix two_state_generator(double lambda1, double lambda2);

/// Piecewise-constant trajectory of the environment on [0, horizon].
struct RegimePath {
    std::vector<double> jump_times;  // strictly increasing, in (0, horizon]
    std::vector<Regime> regimes;     // regimes[0] is the initial regime, regimes[k+1] follows jump k
    double horizon = 0.0;

    Regime initial() const { return regimes.front(); }
    Regime final() const { return regimes.back(); }
    bool operator==(const RegimePath&) const = default;
};

/// Exact event-driven simulation: Exponential(-q_ii) holding times, jump to
/// j != i with probability q_ij / -q_ii. Deterministic in `seed`.
RegimePath simulate_chain(const GeneratorMatrix& q, Regime initial, double horizon, Seed seed);

/// Regime in force at t (right-continuous). With `left_limit` the value
/// just before t is returned instead. Throws TimeOutOfRange outside
/// [0, horizon].
Regime regime_at(const RegimePath& path, double t, bool left_limit = false);

}  // namespace harvest
