#include "cyclecirc/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cyclecirc {

SquareMatrix SquareMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    int n = static_cast<int>(rows.size());
    SquareMatrix m(n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != n)
            raise("BadDimension", "row " + std::to_string(i) + " has " +
                                      std::to_string(rows[static_cast<std::size_t>(i)].size()) +
                                      " entries, expected " + std::to_string(n));
        for (int j = 0; j < n; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return m;
}

double CtmcSpec::max_exit_rate() const {
    double m = 0.0;
    for (int i = 0; i < Q.size(); ++i) m = std::max(m, exit_rate(i));
    return m;
}

DtmcSpec CtmcSpec::embedded() const {
    int n = Q.size();
    SquareMatrix P(n);
    for (int i = 0; i < n; ++i) {
        double qi = exit_rate(i);
        for (int j = 0; j < n; ++j)
            if (j != i) P(i, j) = Q(i, j) / qi;
    }
    return DtmcSpec{states, std::move(P)};
}

const DtmcSpec& ChainSpec::dtmc() const {
    if (!std::holds_alternative<DtmcSpec>(spec_)) raise("WrongKind", "chain is not a DTMC");
    return std::get<DtmcSpec>(spec_);
}

const CtmcSpec& ChainSpec::ctmc() const {
    if (!std::holds_alternative<CtmcSpec>(spec_)) raise("WrongKind", "chain is not a CTMC");
    return std::get<CtmcSpec>(spec_);
}

double ChainSpec::edge_weight(int i, int j) const {
    return kind() == ChainKind::dtmc ? dtmc().P(i, j) : ctmc().Q(i, j);
}

namespace {

// Strong connectivity of the positive-weight support digraph, by a forward
// and a backward reachability sweep from state 0.
bool strongly_connected(const SquareMatrix& w, bool off_diagonal_only) {
    int n = w.size();
    auto reach = [&](bool transpose) {
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < n; ++v) {
                if (off_diagonal_only && v == u) continue;
                double e = transpose ? w(v, u) : w(u, v);
                if (e > 0.0 && !seen[static_cast<std::size_t>(v)]) {
                    seen[static_cast<std::size_t>(v)] = 1;
                    stack.push_back(v);
                }
            }
        }
        return seen;
    };
    auto fwd = reach(false);
    auto bwd = reach(true);
    for (int v = 0; v < n; ++v)
        if (!fwd[static_cast<std::size_t>(v)] || !bwd[static_cast<std::size_t>(v)]) return false;
    return true;
}

} // namespace

ChainSpec validate_chain(StateSpace states, const std::vector<std::vector<double>>& matrix,
                         ChainKind kind, const ValidateOptions& options) {
    int n = states.size();
    if (n < 2) raise("BadDimension", "need at least 2 states, got " + std::to_string(n));
    if (static_cast<int>(matrix.size()) != n)
        raise("BadDimension", "matrix has " + std::to_string(matrix.size()) + " rows for " +
                                  std::to_string(n) + " states");
    SquareMatrix m = SquareMatrix::from_rows(matrix);

    if (kind == ChainKind::dtmc) {
        for (int i = 0; i < n; ++i) {
            double sum = 0.0;
            for (int j = 0; j < n; ++j) {
                if (m(i, j) < 0.0)
                    raise("NonStochasticRow", "P[" + std::to_string(i) + "][" + std::to_string(j) +
                                                  "] = " + std::to_string(m(i, j)) + " is negative");
                sum += m(i, j);
            }
            if (std::abs(sum - 1.0) > options.tol) {
                if (!options.renormalize)
                    raise("NonStochasticRow",
                          "row " + std::to_string(i) + " sums to " + std::to_string(sum));
                for (int j = 0; j < n; ++j) m(i, j) /= sum;
            }
        }
        if (!strongly_connected(m, false))
            raise("Reducible", "support digraph of P is not strongly connected");
        return ChainSpec(DtmcSpec{std::move(states), std::move(m)});
    }

    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            if (m(i, j) < 0.0)
                raise("NegativeRate", "Q[" + std::to_string(i) + "][" + std::to_string(j) + "] = " +
                                          std::to_string(m(i, j)) + " is negative");
            off += m(i, j);
        }
        if (std::abs(m(i, i) + off) > options.tol * std::max(1.0, off)) {
            if (!options.renormalize)
                raise("BadDiagonal", "Q[" + std::to_string(i) + "][" + std::to_string(i) +
                                         "] = " + std::to_string(m(i, i)) + ", expected " +
                                         std::to_string(-off));
            m(i, i) = -off;
        } else {
            m(i, i) = -off; // remove the tolerance-sized slack exactly
        }
    }
    if (!strongly_connected(m, true))
        raise("Reducible", "support digraph of Q is not strongly connected");
    return ChainSpec(CtmcSpec{std::move(states), std::move(m)});
}

double cycle_strength(const ChainSpec& chain, const Cycle& c) {
    for (int s : c.states())
        if (!chain.states().contains(s))
            raise("UnknownState", "cycle state " + std::to_string(s) + " not in chain");
    if (c.length() == 1)
        return chain.kind() == ChainKind::dtmc ? chain.dtmc().P(c.state(0), c.state(0)) : 0.0;
    double gamma = 1.0;
    for (int k = 0; k < c.length(); ++k) gamma *= chain.edge_weight(c.state(k), c.state(k + 1));
    return gamma;
}

double cycle_affinity(const ChainSpec& chain, const Cycle& c) {
    double fwd = cycle_strength(chain, c);
    if (fwd <= 0.0) raise("ZeroForwardStrength", "cycle has strength 0");
    double bwd = cycle_strength(chain, c.reversed());
    if (bwd == 0.0) return std::numeric_limits<double>::infinity();
    return std::log(fwd / bwd);
}

namespace {

// Enumerates simple cycles with minimal vertex first (each rotation class
// once per direction) and reports the first Kolmogorov violation.
struct CycleScan {
    const ChainSpec& chain;
    int max_len;
    double rel_tol;
    std::vector<int> path;
    std::vector<char> used;
    std::optional<Cycle> witness;

    bool violated(const std::vector<int>& states) {
        Cycle c(states);
        double fwd = cycle_strength(chain, c);
        double bwd = cycle_strength(chain, c.reversed());
        double scale = std::max({std::abs(fwd), std::abs(bwd), 1.0});
        if (std::abs(fwd - bwd) > rel_tol * scale) {
            witness = c;
            return true;
        }
        return false;
    }

    bool dfs(int root) {
        int u = path.back();
        int n = chain.size();
        for (int v = root; v < n; ++v) { // only vertices >= root keeps root minimal
            if (chain.edge_weight(u, v) <= 0.0 && chain.edge_weight(v, u) <= 0.0) continue;
            if (v == root) {
                if (static_cast<int>(path.size()) >= 3 && violated(path)) return true;
                continue;
            }
            if (used[static_cast<std::size_t>(v)]) continue;
            if (static_cast<int>(path.size()) == max_len) continue;
            used[static_cast<std::size_t>(v)] = 1;
            path.push_back(v);
            if (dfs(root)) return true;
            path.pop_back();
            used[static_cast<std::size_t>(v)] = 0;
        }
        return false;
    }
};

} // namespace

ReversibilityResult kolmogorov_reversible(const ChainSpec& chain, int max_cycle_len, double rel_tol) {
    int n = chain.size();
    if (max_cycle_len <= 0 || max_cycle_len > n) max_cycle_len = n;
    // Cycles of length 1 and 2 are self-conjugate; only length >= 3 can break
    // the criterion.
    CycleScan scan{chain, max_cycle_len, rel_tol, {}, std::vector<char>(static_cast<std::size_t>(n), 0), {}};
    for (int root = 0; root < n; ++root) {
        scan.path = {root};
        std::fill(scan.used.begin(), scan.used.end(), 0);
        scan.used[static_cast<std::size_t>(root)] = 1;
        if (scan.dfs(root)) return {false, scan.witness};
    }
    return {true, std::nullopt};
}

} // namespace cyclecirc
