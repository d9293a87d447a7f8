#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cyclecirc/chain.hpp"
#include "cyclecirc/exact.hpp"
#include "cyclecirc/haldane.hpp"

namespace cyclecirc {

struct FtParams {
    std::vector<int> caps = {20};
    double poisson_tail_tol = 1e-12;
    long long replicas = 20000;
    std::uint64_t seed = 0;
    int workers = 0;
    double significance = 0.01;
    double cell_floor = 1e-12;
};

struct TransientCell {
    std::vector<int> net; // net counts (n_1, ..., n_r)
    int flipped = 0;      // coordinate k that was negated on the other side
    double log_ratio = 0.0;
    double target = 0.0; // n_k * affinity_k
    double deviation = 0.0;
    double bound = 0.0;
};

struct TransientFtReport {
    TestMode mode = TestMode::exact;
    double t = 0.0;
    std::vector<double> affinities;
    std::vector<int> skipped; // cycles excluded for infinite affinity
    std::vector<TransientCell> cells;
    std::vector<double> fitted_affinities; // slope of log-ratio over net count
    double max_deviation = 0.0;
    double trunc_mass = 0.0;
    bool passed = true;

    std::string to_json(const std::string& input_digest) const;
};

// Ratio form of the count-reversal symmetry: P(K_k = n/t ...) over
// P(K_k = -n/t ...) against exp(n * affinity), cell by cell on the exact net
// count law.
TransientFtReport transient_ft(const ChainSpec& chain, const std::vector<Cycle>& cycles, int start,
                               double t, TestMode mode, const FtParams& params = {});

struct IntegralFtReport {
    TestMode mode = TestMode::exact;
    double t = 0.0;
    double estimate = 0.0;
    double lower = 0.0, upper = 0.0; // truncation band (exact) or CI (mc)
    double trunc_mass = 0.0;
    std::vector<int> skipped;
    bool passed = true;

    std::string to_json(const std::string& input_digest) const;
};

// E exp(-t sum_k K_k * affinity_k) = 1, exactly on the lattice (exact mode)
// or as a replica mean with a confidence interval (mc mode).
IntegralFtReport integral_ft(const ChainSpec& chain, const std::vector<Cycle>& cycles, int start,
                             double t, TestMode mode, const FtParams& params = {});

struct KlspRow {
    std::vector<double> lambda;
    int flipped = 0;
    double lhs = 0.0, rhs = 0.0;
    double residual = 0.0;
    double bound = 0.0;
};

struct KlspReport {
    double t = 0.0;
    std::vector<KlspRow> rows;
    double max_residual = 0.0;
    double trunc_mass = 0.0;
    std::vector<int> skipped;
    bool passed = true;

    std::string to_json(const std::string& input_digest) const;
};

// Generating-function symmetry of the net counts:
// h(.., lambda_k, ..) = h(.., -(lambda_k + affinity_k), ..), checked on a
// lambda grid via the exact count law.
KlspReport klsp_check(const ChainSpec& chain, const std::vector<Cycle>& cycles, int start, double t,
                      const std::vector<std::vector<double>>& lambda_grid,
                      const FtParams& params = {});

} // namespace cyclecirc
