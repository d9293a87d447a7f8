// Test-only brute-force oracles: plain path enumeration over all S^n paths.
// These deliberately share no code with the DP engines they check.
#pragma once

#include <functional>
#include <map>
#include <random>
#include <vector>

#include "cyclecirc/chain.hpp"
#include "cyclecirc/derived.hpp"

namespace oracle {

using cyclecirc::ChainKind;
using cyclecirc::ChainSpec;
using cyclecirc::Cycle;
using cyclecirc::DtmcSpec;
using cyclecirc::StateSpace;

// Visits every path (x_0 = start, x_1, ..., x_n) with its probability.
inline void for_each_path(const DtmcSpec& chain, int start, int n,
                          const std::function<void(const std::vector<int>&, double)>& visit) {
    int S = chain.states.size();
    std::vector<int> path(static_cast<std::size_t>(n) + 1, 0);
    path[0] = start;
    std::function<void(int, double)> rec = [&](int depth, double prob) {
        if (prob == 0.0) return;
        if (depth == n) {
            visit(path, prob);
            return;
        }
        for (int j = 0; j < S; ++j) {
            path[static_cast<std::size_t>(depth) + 1] = j;
            rec(depth + 1, prob * chain.P(path[static_cast<std::size_t>(depth)], j));
        }
    };
    rec(0, 1.0);
}

// p^H_ij(n) by enumeration: X_n = j and X_1..X_{n-1} outside H.
inline double taboo_prob_brute(const DtmcSpec& chain, int i, int j, const std::vector<int>& taboo,
                               int n) {
    if (n == 0) return i == j ? 1.0 : 0.0;
    double total = 0.0;
    for_each_path(chain, i, n, [&](const std::vector<int>& path, double prob) {
        if (path.back() != j) return;
        for (int m = 1; m < n; ++m)
            for (int h : taboo)
                if (path[static_cast<std::size_t>(m)] == h) return;
        total += prob;
    });
    return total;
}

// Joint law of (T, which watched cycle pops at T) by enumeration, restricted
// to T <= n_max: result[k][n] = P(T = n, popped = watched[k]).
inline std::vector<std::vector<double>> forming_dist_brute(const DtmcSpec& chain,
                                                           const std::vector<Cycle>& watched,
                                                           int start, int n_max) {
    std::vector<std::vector<double>> buckets(watched.size(),
                                             std::vector<double>(static_cast<std::size_t>(n_max) + 1, 0.0));
    for_each_path(chain, start, n_max, [&](const std::vector<int>& path, double prob) {
        cyclecirc::DerivedState y(chain.states.size(), path[0]);
        for (int n = 1; n <= n_max; ++n) {
            auto popped = y.advance(path[static_cast<std::size_t>(n)]);
            if (!popped) continue;
            for (std::size_t k = 0; k < watched.size(); ++k)
                if (*popped == watched[k]) {
                    buckets[k][static_cast<std::size_t>(n)] += prob;
                    return; // first watched pop absorbs
                }
        }
    });
    return buckets;
}

// Joint law of watched-cycle counts after n steps by enumeration.
inline std::map<std::vector<int>, double> count_dist_brute(const DtmcSpec& chain,
                                                           const std::vector<Cycle>& watched,
                                                           int start, int n) {
    std::map<std::vector<int>, double> law;
    for_each_path(chain, start, n, [&](const std::vector<int>& path, double prob) {
        cyclecirc::DerivedState y(chain.states.size(), path[0]);
        std::vector<int> counts(watched.size(), 0);
        for (int m = 1; m <= n; ++m) {
            auto popped = y.advance(path[static_cast<std::size_t>(m)]);
            if (!popped) continue;
            for (std::size_t k = 0; k < watched.size(); ++k)
                if (*popped == watched[k]) ++counts[k];
        }
        law[counts] += prob;
    });
    return law;
}

// Random fully-supported stochastic matrix (every entry positive).
inline DtmcSpec random_dtmc(int S, std::uint64_t seed, bool with_self_loops = true) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(S),
                                          std::vector<double>(static_cast<std::size_t>(S), 0.0));
    for (int i = 0; i < S; ++i) {
        double sum = 0.0;
        for (int j = 0; j < S; ++j) {
            if (!with_self_loops && j == i) continue;
            rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = u(gen);
            sum += rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
        for (int j = 0; j < S; ++j) rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] /= sum;
    }
    return cyclecirc::validate_chain(StateSpace::indexed(S), rows, ChainKind::dtmc).dtmc();
}

// Random fully-connected rate matrix.
inline cyclecirc::CtmcSpec random_ctmc(int S, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.2, 2.0);
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(S),
                                          std::vector<double>(static_cast<std::size_t>(S), 0.0));
    for (int i = 0; i < S; ++i) {
        double off = 0.0;
        for (int j = 0; j < S; ++j) {
            if (j == i) continue;
            rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = u(gen);
            off += rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
        rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = -off;
    }
    return cyclecirc::validate_chain(StateSpace::indexed(S), rows, ChainKind::ctmc).ctmc();
}

// All r! directed cycles through the full state set {0..S-1} (pairwise
// similar by construction).
inline std::vector<Cycle> all_full_cycles(int S) {
    std::vector<int> rest;
    for (int s = 1; s < S; ++s) rest.push_back(s);
    std::sort(rest.begin(), rest.end());
    std::vector<Cycle> cycles;
    do {
        std::vector<int> states{0};
        states.insert(states.end(), rest.begin(), rest.end());
        cycles.emplace_back(states);
    } while (std::next_permutation(rest.begin(), rest.end()));
    return cycles;
}

} // namespace oracle
