#include "harvest/ctmc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "harvest/error.hpp"
#include "chain_detail.hpp"

namespace harvest {

namespace {

constexpr double kRowSumTolerance = 1e-9;

}  // namespace

GeneratorMatrix validate_generator(const Eigen::MatrixXd& rates) {
    const auto m = rates.rows();
    if (m < 1 || rates.cols() != m) {
        throw Error(ErrorKind::InvalidArgument, "generator must be a non-empty square matrix");
    }
    if (!rates.allFinite()) {
        throw Error(ErrorKind::InvalidArgument, "generator has non-finite entries");
    }
    Eigen::MatrixXd q = rates;
    for (Eigen::Index i = 0; i < m; ++i) {
        double off = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (j == i) continue;
            if (q(i, j) < 0.0) {
                std::ostringstream os;
                os << "q(" << i << "," << j << ") = " << q(i, j) << " < 0";
                throw Error(ErrorKind::NegativeOffDiagonal, os.str());
            }
            off += q(i, j);
        }
        const double residual = off + q(i, i);
        if (std::abs(residual) > kRowSumTolerance) {
            std::ostringstream os;
            os << "row " << i << " sums to " << residual;
            throw Error(ErrorKind::RowSumTooLarge, os.str());
        }
        q(i, i) = -off;
        if (m > 1 && q(i, i) >= 0.0) {
            std::ostringstream os;
            os << "row " << i << " has q_ii = " << q(i, i) << "; every regime must be left at a positive rate";
            throw Error(ErrorKind::NonAbsorbingRowViolation, os.str());
        }
    }
    return GeneratorMatrix(std::move(q));
}

GeneratorMatrix validate_generator(const std::vector<std::vector<double>>& rows) {
    const auto m = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd q(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != m) {
            throw Error(ErrorKind::InvalidArgument, "generator rows must all have length m");
        }
        for (Eigen::Index j = 0; j < m; ++j) q(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return validate_generator(q);
}

GeneratorMatrix two_state_generator(double lambda1, double lambda2) {
    Eigen::MatrixXd q(2, 2);
    q << -lambda1, lambda1, lambda2, -lambda2;
    return validate_generator(q);
}

RegimePath simulate_chain(const GeneratorMatrix& q, Regime initial, double horizon, Seed seed) {
    const std::size_t m = q.size();
    if (!(horizon > 0.0)) throw Error(ErrorKind::InvalidArgument, "horizon must be positive");
    if (initial >= m) throw Error(ErrorKind::RegimeOutOfRange, "initial regime out of range");

    RegimePath path;
    path.horizon = horizon;
    path.regimes.push_back(initial);
    if (m == 1) return path;

    detail::ChainCursor chain(q, initial, seed);
    while (chain.next_jump() <= horizon) {
        path.jump_times.push_back(chain.next_jump());
        path.regimes.push_back(chain.advance());
    }
    return path;
}

Regime regime_at(const RegimePath& path, double t, bool left_limit) {
    if (t < 0.0 || t > path.horizon) {
        std::ostringstream os;
        os << "t = " << t << " outside [0, " << path.horizon << "]";
        throw Error(ErrorKind::TimeOutOfRange, os.str());
    }
    const auto& jt = path.jump_times;
    // Number of jumps at or before t (strictly before t for the left limit).
    const auto it = left_limit ? std::lower_bound(jt.begin(), jt.end(), t)
                               : std::upper_bound(jt.begin(), jt.end(), t);
    return path.regimes[static_cast<std::size_t>(it - jt.begin())];
}

}  // namespace harvest
