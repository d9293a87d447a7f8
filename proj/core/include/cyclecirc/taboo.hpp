#pragma once

#include <vector>

#include "cyclecirc/chain.hpp"

namespace cyclecirc {

// n-step transition probabilities that avoid a taboo set at the intermediate
// steps: p^H_ij(n) = P_i(X_n = j, X_1..X_{n-1} not in H). Endpoints are free.
class TabooTable {
public:
    TabooTable(const DtmcSpec& chain, std::vector<int> taboo, int n_max);

    double prob(int i, int j, int n) const { return table_[static_cast<std::size_t>(n)](i, j); }
    int n_max() const { return static_cast<int>(table_.size()) - 1; }
    const std::vector<int>& taboo() const { return taboo_; }

private:
    std::vector<int> taboo_;
    std::vector<SquareMatrix> table_; // table_[n](i, j) = p^H_ij(n)
};

double taboo_prob(const DtmcSpec& chain, int i, int j, const std::vector<int>& taboo, int n);

// Residual of the last-visit decomposition over an extra taboo state k not in
// H:  p^H_ij(n) = p^{H,k}_ij(n) + sum_{m=1}^{n-1} p^H_ik(m) p^{H,k}_kj(n-m).
// A correct table makes this 0 to machine precision.
double taboo_last_visit_residual(const DtmcSpec& chain, int i, int j, const std::vector<int>& taboo,
                                 int k, int n);

// Convolution of return probabilities with nested taboo sets:
//   sum over n_1+...+n_s = n of
//     p^H_{i1,i1}(n_1) p^{H,i1}_{i2,i2}(n_2) ... p^{H,i1..i_{s-1}}_{is,is}(n_s).
// Invariant under permutations of the states, which is the engine behind the
// forming-time symmetry checks.
double return_convolution(const DtmcSpec& chain, const std::vector<int>& taboo,
                          const std::vector<int>& states, int n);

} // namespace cyclecirc
