#pragma once

#include <random>

#include <boost/random/normal_distribution.hpp>

#include "harvest/rng.hpp"

namespace harvest::detail {

using Engine = std::mt19937_64;

// Standard normal source with optional sign flip for antithetic pairing.
class NormalSource {
public:
    NormalSource(Seed seed, bool negate) : engine_(seed), sign_(negate ? -1.0 : 1.0) {}

    double operator()() { return sign_ * dist_(engine_); }

private:
    Engine engine_;
    boost::random::normal_distribution<double> dist_;
    double sign_;
};

}  // namespace harvest::detail
