#pragma once

#include <span>
#include <vector>

#include "cyclecirc/chain.hpp"
#include "cyclecirc/simulate.hpp"

namespace cyclecirc {

// Splits the empirical entropy production rate of a CTMC trajectory into the
// completed-cycle part and the leftover boundary/stack part:
//   total = cycle_part + residual,
// where cycle_part = (1/2) sum over cycles of K^c_t log(strength ratio).
struct EntropyDecomposition {
    double t = 0.0;
    double total = 0.0;      // W_t
    double cycle_part = 0.0; // net circulations weighted by affinities
    double residual = 0.0;   // total - cycle_part; O(1/t) for long runs
    bool finite = true;      // false when a traversed edge has no reverse rate
};

// p0 is the initial distribution used for the boundary term; p_t is computed
// exactly from the master equation.
EntropyDecomposition entropy_decomposition(const Trajectory& traj, const CtmcSpec& chain,
                                           std::span<const double> p0, double t);

// p0 exp(Q t), evaluated by uniformization with the series tail below tail_tol.
std::vector<double> transient_distribution(const CtmcSpec& chain, std::span<const double> p0,
                                           double t, double tail_tol = 1e-15);

std::vector<double> stationary_distribution(const CtmcSpec& chain);
std::vector<double> stationary_distribution(const DtmcSpec& chain);

} // namespace cyclecirc
