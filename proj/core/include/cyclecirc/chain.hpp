#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "cyclecirc/cycle.hpp"
#include "cyclecirc/state_space.hpp"

namespace cyclecirc {

enum class ChainKind { dtmc, ctmc };

// Dense row-major square matrix; small finite chains only.
class SquareMatrix {
public:
    explicit SquareMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0) {}

    static SquareMatrix from_rows(const std::vector<std::vector<double>>& rows);

    int size() const { return n_; }
    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

    bool operator==(const SquareMatrix&) const = default;

private:
    int n_;
    std::vector<double> a_;
};

// Validated discrete-time chain: rows of P sum to 1, irreducible support.
struct DtmcSpec {
    StateSpace states;
    SquareMatrix P;
};

// Validated continuous-time chain: nonnegative off-diagonal rates,
// conservative diagonal, irreducible support.
struct CtmcSpec {
    StateSpace states;
    SquareMatrix Q;

    double exit_rate(int i) const { return -Q(i, i); }
    double max_exit_rate() const;
    // Jump chain p_ij = q_ij / q_i. Valid whenever the CTMC validated.
    DtmcSpec embedded() const;
};

// A validated chain of either kind. Immutable after construction.
class ChainSpec {
public:
    explicit ChainSpec(DtmcSpec spec) : spec_(std::move(spec)) {}
    explicit ChainSpec(CtmcSpec spec) : spec_(std::move(spec)) {}

    ChainKind kind() const {
        return std::holds_alternative<DtmcSpec>(spec_) ? ChainKind::dtmc : ChainKind::ctmc;
    }
    const StateSpace& states() const {
        return kind() == ChainKind::dtmc ? dtmc().states : ctmc().states;
    }
    int size() const { return states().size(); }

    const DtmcSpec& dtmc() const;
    const CtmcSpec& ctmc() const;

    // One-step weight of edge i -> j: p_ij for a DTMC, q_ij for a CTMC.
    double edge_weight(int i, int j) const;

    // The chain whose step sequence drives the derived chain: the DTMC itself,
    // or the jump chain of a CTMC.
    DtmcSpec embedded() const { return kind() == ChainKind::dtmc ? dtmc() : ctmc().embedded(); }

private:
    std::variant<DtmcSpec, CtmcSpec> spec_;
};

struct ValidateOptions {
    double tol = 1e-12;       // row-sum / conservativity tolerance
    bool renormalize = false; // fix row sums instead of rejecting (explicit opt-in)
};

// Validates a raw matrix as a DTMC or CTMC over `states`.
// Errors: NonStochasticRow, NegativeRate, BadDiagonal, Reducible, BadDimension.
ChainSpec validate_chain(StateSpace states, const std::vector<std::vector<double>>& matrix,
                         ChainKind kind, const ValidateOptions& options = {});

// Product of one-step weights around the cycle; 0 if any edge is absent.
double cycle_strength(const ChainSpec& chain, const Cycle& c);

// log(strength(c) / strength(c-)); +infinity when the reversed cycle has
// strength 0. Error ZeroForwardStrength when strength(c) == 0.
double cycle_affinity(const ChainSpec& chain, const Cycle& c);

struct ReversibilityResult {
    bool reversible = true;
    std::optional<Cycle> witness; // a cycle with strength(c) != strength(c-)
};

// Kolmogorov's criterion: strength(c) == strength(c-) for every cycle of
// length <= max_cycle_len (default: number of states, which is exhaustive).
ReversibilityResult kolmogorov_reversible(const ChainSpec& chain, int max_cycle_len = 0,
                                          double rel_tol = 1e-12);

} // namespace cyclecirc
