#pragma once

#include <limits>
#include <random>

#include "harvest/ctmc.hpp"
#include "rng_detail.hpp"

namespace harvest::detail {

// Lazily unrolled environment chain. Produces the same jump sequence as
// simulate_chain for equal seeds, one jump at a time.
class ChainCursor {
public:
    ChainCursor(const GeneratorMatrix& q, Regime initial, Seed seed) : q_(&q), engine_(seed), current_(initial) {
        draw();
    }

    Regime current() const noexcept { return current_; }
    double next_jump() const noexcept { return next_jump_; }

    // Moves to the pending jump and draws the one after it.
    Regime advance() {
        current_ = pending_;
        draw();
        return current_;
    }

private:
    void draw() {
        if (q_->size() == 1) {
            next_jump_ = std::numeric_limits<double>::infinity();
            return;
        }
        const double rate = q_->exit_rate(current_);
        next_jump_ += std::exponential_distribution<double>(rate)(engine_);
        // Choose the destination proportionally to q_ij, j != i.
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(engine_) * rate;
        double acc = 0.0;
        pending_ = current_;
        for (Regime j = 0; j < q_->size(); ++j) {
            if (j == current_) continue;
            acc += q_->rate(current_, j);
            pending_ = j;
            if (u < acc) break;
        }
    }

    const GeneratorMatrix* q_;
    Engine engine_;
    Regime current_;
    Regime pending_ = 0;
    double next_jump_ = 0.0;
};

}  // namespace harvest::detail
