#include "cyclecirc/taboo.hpp"

#include <algorithm>

#include "cyclecirc/stats.hpp"

namespace cyclecirc {

namespace {

bool in_set(const std::vector<int>& set, int s) {
    return std::find(set.begin(), set.end(), s) != set.end();
}

std::vector<int> with_state(std::vector<int> set, int s) {
    if (!in_set(set, s)) set.push_back(s);
    return set;
}

} // namespace

TabooTable::TabooTable(const DtmcSpec& chain, std::vector<int> taboo, int n_max)
    : taboo_(std::move(taboo)) {
    int n_states = chain.states.size();
    for (int s : taboo_)
        if (s < 0 || s >= n_states)
            raise("UnknownState", "taboo state " + std::to_string(s) + " out of range");
    table_.reserve(static_cast<std::size_t>(n_max) + 1);

    SquareMatrix identity(n_states);
    for (int i = 0; i < n_states; ++i) identity(i, i) = 1.0;
    table_.push_back(std::move(identity));
    if (n_max >= 1) table_.push_back(chain.P);

    std::vector<char> allowed(static_cast<std::size_t>(n_states), 1);
    for (int s : taboo_) allowed[static_cast<std::size_t>(s)] = 0;

    // p^H(n)_ij = sum_{k not in H} p_ik p^H(n-1)_kj
    for (int n = 2; n <= n_max; ++n) {
        const SquareMatrix& prev = table_.back();
        SquareMatrix next(n_states);
        for (int i = 0; i < n_states; ++i)
            for (int j = 0; j < n_states; ++j) {
                KahanSum sum;
                for (int k = 0; k < n_states; ++k)
                    if (allowed[static_cast<std::size_t>(k)]) sum.add(chain.P(i, k) * prev(k, j));
                next(i, j) = sum.value();
            }
        table_.push_back(std::move(next));
    }
}

double taboo_prob(const DtmcSpec& chain, int i, int j, const std::vector<int>& taboo, int n) {
    if (n < 0) raise("BadHorizon", "n must be nonnegative");
    return TabooTable(chain, taboo, n).prob(i, j, n);
}

double taboo_last_visit_residual(const DtmcSpec& chain, int i, int j, const std::vector<int>& taboo,
                                 int k, int n) {
    if (in_set(taboo, k)) raise("StateInTaboo", "k must lie outside the taboo set");
    TabooTable base(chain, taboo, n);
    TabooTable extended(chain, with_state(taboo, k), n);
    KahanSum rhs;
    rhs.add(extended.prob(i, j, n));
    for (int m = 1; m <= n - 1; ++m) rhs.add(base.prob(i, k, m) * extended.prob(k, j, n - m));
    return std::abs(base.prob(i, j, n) - rhs.value());
}

double return_convolution(const DtmcSpec& chain, const std::vector<int>& taboo,
                          const std::vector<int>& states, int n) {
    if (states.empty()) raise("EmptyCycle", "need at least one state");
    for (std::size_t a = 0; a < states.size(); ++a) {
        if (in_set(taboo, states[a]))
            raise("StateInTaboo", "state " + std::to_string(states[a]) + " lies in the taboo set");
        for (std::size_t b = a + 1; b < states.size(); ++b)
            if (states[a] == states[b]) raise("DuplicateState", "states must be distinct");
    }

    // conv[m] accumulates the convolution of the first factors at length m.
    std::vector<double> conv(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> nested = taboo;
    {
        TabooTable first(chain, nested, n);
        for (int m = 0; m <= n; ++m) conv[static_cast<std::size_t>(m)] = first.prob(states[0], states[0], m);
    }
    for (std::size_t idx = 1; idx < states.size(); ++idx) {
        nested = with_state(nested, states[idx - 1]);
        TabooTable factor(chain, nested, n);
        std::vector<double> next(static_cast<std::size_t>(n) + 1, 0.0);
        for (int m = 0; m <= n; ++m) {
            KahanSum sum;
            for (int u = 0; u <= m; ++u)
                sum.add(conv[static_cast<std::size_t>(u)] *
                        factor.prob(states[idx], states[idx], m - u));
            next[static_cast<std::size_t>(m)] = sum.value();
        }
        conv = std::move(next);
    }
    return conv[static_cast<std::size_t>(n)];
}

} // namespace cyclecirc
