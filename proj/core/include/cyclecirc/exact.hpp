#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "cyclecirc/augmented.hpp"
#include "cyclecirc/chain.hpp"

namespace cyclecirc {

// Exact joint law of (T, which watched cycle forms at T) for the chain
// started at `start`, where T is the first step at which any watched cycle
// is popped. bucket(k, n) = P_start(T = n, the popped cycle is watched[k]).
class FormingDist {
public:
    FormingDist(std::vector<Cycle> watched, int start, int n_max);

    const std::vector<Cycle>& watched() const { return watched_; }
    int start() const { return start_; }
    int n_max() const { return n_max_; }

    double bucket(int k, int n) const {
        return buckets_[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)];
    }
    // P(T = n) = sum over k of bucket(k, n).
    double time_marginal(int n) const;
    // sum over n <= n_max of bucket(k, n); underestimates P(T = T^{c_k}) by
    // at most tail_mass().
    double total(int k) const;
    double tail_mass() const { return tail_mass_; }

private:
    friend FormingDist exact_forming_dist(const DtmcSpec&, std::vector<Cycle>, int, int);
    std::vector<Cycle> watched_;
    int start_;
    int n_max_;
    std::vector<std::vector<double>> buckets_; // [k][n], index 0 unused
    double tail_mass_ = 0.0;
};

// Forward DP over the reachable derived stacks. Mass is absorbed at the
// first watched pop; unwatched pops pass through. The watched family must
// share at least one common state (error NoCommonState otherwise).
FormingDist exact_forming_dist(const DtmcSpec& chain, std::vector<Cycle> watched, int start,
                               int n_max);

// Exact joint law of the cycle counts (N^{c_1}, ..., N^{c_r}) at the horizon,
// on the lattice truncated at per-cycle caps. Mass that runs over a cap or
// beyond the Poisson series is reported in trunc_mass, never dropped
// silently.
class CountDistribution {
public:
    const std::vector<Cycle>& cycles() const { return cycles_; }
    const std::vector<int>& caps() const { return caps_; }
    double horizon() const { return horizon_; }
    bool continuous() const { return continuous_; }
    double trunc_mass() const { return trunc_mass_; }

    double mass(std::span<const int> counts) const;
    double total_mass() const;

    // Invokes fn(counts, probability) for every lattice cell.
    template <typename F>
    void for_each_cell(F&& fn) const {
        std::vector<int> counts(cycles_.size(), 0);
        for (std::size_t cell = 0; cell < mass_.size(); ++cell) {
            fn(static_cast<std::span<const int>>(counts), mass_[cell]);
            for (std::size_t k = 0; k < counts.size(); ++k) {
                if (++counts[k] <= caps_[k]) break;
                counts[k] = 0;
            }
        }
    }

    std::size_t cell_index(std::span<const int> counts) const;

private:
    friend CountDistribution exact_count_dist(const ChainSpec&, const std::vector<Cycle>&, int,
                                              double, std::vector<int>, double);
    std::vector<Cycle> cycles_;
    std::vector<int> caps_;
    std::vector<std::size_t> strides_;
    double horizon_ = 0.0;
    bool continuous_ = false;
    double trunc_mass_ = 0.0;
    std::vector<double> mass_;
};

// DTMC: steps the joint (derived stack, counts) law `horizon` times.
// CTMC: uniformization with rate 1.05 * max exit rate; the Poisson series is
// truncated below `poisson_tail_tol`, and the dropped weight goes into
// trunc_mass. The start state must lie on every watched cycle.
CountDistribution exact_count_dist(const ChainSpec& chain, const std::vector<Cycle>& cycles,
                                   int start, double horizon, std::vector<int> caps,
                                   double poisson_tail_tol = 1e-12);

struct GeneratingValue {
    double value = 0.0;
    // Crude size of what the truncated mass could contribute: trunc_mass
    // weighted at the lattice boundary. An estimate, not a bound.
    double trunc_error = 0.0;
};

// g(lambda) = sum over cells of mass * exp(lambda . counts).
// Error Overflow when exp would not be representable at the caps.
GeneratingValue exact_generating(const CountDistribution& dist, std::span<const double> lambda);

// Law of the net counts D_k = N^{c_k} - N^{c_k-} derived from a joint count
// law over the interleaved family (c_1, c_1-, ..., c_r, c_r-).
struct NetCountDistribution {
    std::vector<Cycle> cycles; // the forward cycle of each conjugate pair
    double horizon = 0.0;
    double trunc_mass = 0.0;
    std::map<std::vector<int>, double> mass; // net count vector -> probability
};

std::vector<Cycle> with_conjugates(const std::vector<Cycle>& cycles);
NetCountDistribution net_count_dist(const CountDistribution& joint);

// Oracle dump: "# t=... caps=... trunc=..." then "n_1,...,n_r,probability".
void dump_count_dist_csv(const CountDistribution& dist, std::ostream& out);

// Poisson(mu) weights up to the smallest K with tail below tail_tol.
struct PoissonWeights {
    std::vector<double> w;
    double tail = 0.0;
};
PoissonWeights poisson_weights(double mu, double tail_tol);

} // namespace cyclecirc
