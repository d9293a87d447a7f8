#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cyclecirc/chain.hpp"
#include "cyclecirc/exact.hpp"

namespace cyclecirc {

enum class TestMode { exact, mc };

struct HaldaneParams {
    int n_max = 200;                    // exact mode: DP depth in embedded steps
    long long replicas = 20000;         // mc mode
    std::uint64_t seed = 0;
    int workers = 0;
    double significance = 0.01;         // family-wise, Bonferroni over pairs
    long long max_steps = 10'000'000;   // per-replica budget for the first event
    double exact_tol = 1e-10;
    double cell_floor = 1e-12;          // cells below this mass are not compared
};

struct HaldanePairStat {
    int k = 0, l = 0;
    double theoretical_ratio = 0.0; // strength(c_k) / strength(c_l)
    double ratio = 0.0;             // estimated or exact P(T=T^{c_k}) / P(T=T^{c_l})
    double log_ratio_se = 0.0;      // mc only
    double max_cell_deviation = 0.0; // exact: worst relative per-n deviation
    int cells_compared = 0;
    double ks_statistic = 0.0; // mc only
    double ks_p_value = 1.0;   // mc only
    bool passed = true;
};

struct HaldaneReport {
    TestMode mode = TestMode::exact;
    std::string family;
    int start = 0;
    double t_or_nmax = 0.0;
    double significance = 0.01;
    double pair_alpha = 0.01; // after Bonferroni
    std::vector<double> strengths;
    std::vector<long long> event_counts; // mc
    std::vector<HaldanePairStat> pairs;
    double tail_mass = 0.0; // exact
    bool rejected = false;

    std::string to_json(const std::string& input_digest) const;
};

// Forming-time symmetry test over a family of similar cycles (any start), or
// of cycles through a common start state. Exact mode compares the forming
// distribution cell-by-cell against strength ratios; mc mode estimates the
// ratios from replica first events and compares conditional forming-time
// samples pairwise with two-sample KS tests.
HaldaneReport haldane_test(const ChainSpec& chain, const std::vector<Cycle>& family, int start,
                           TestMode mode, const HaldaneParams& params = {});

struct IndependenceReport {
    TestMode mode = TestMode::exact;
    std::string family;
    int start = 0;
    double max_residual = 0.0; // exact
    double chi_square = 0.0;   // mc
    double p_value = 1.0;      // mc
    long long dof = 0;
    bool rejected = false;

    std::string to_json(const std::string& input_digest) const;
};

// Independence of (which similar cycle forms first) from the forming time.
// Exact mode: max over cells of |joint - product|; mc mode: chi-square on a
// binned contingency table.
IndependenceReport independence_test(const ChainSpec& chain, const std::vector<Cycle>& family,
                                     int start, TestMode mode, const HaldaneParams& params = {});

// P(the first formed similar cycle is family[k]) = strength_k / sum strengths,
// exact for a pairwise-similar family.
std::vector<double> exact_pick_probabilities(const ChainSpec& chain, const std::vector<Cycle>& family);

} // namespace cyclecirc
