#include "cyclecirc/entropy.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "cyclecirc/derived.hpp"
#include "cyclecirc/exact.hpp"
#include "cyclecirc/stats.hpp"

namespace cyclecirc {

std::vector<double> transient_distribution(const CtmcSpec& chain, std::span<const double> p0,
                                           double t, double tail_tol) {
    int n = chain.Q.size();
    if (static_cast<int>(p0.size()) != n) raise("BadDimension", "p0 has wrong length");
    if (t < 0.0) raise("BadHorizon", "t must be nonnegative");
    double rate = 1.05 * chain.max_exit_rate();
    auto pw = poisson_weights(rate * t, tail_tol);

    std::vector<double> cur(p0.begin(), p0.end());
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    std::vector<double> next(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < pw.w.size(); ++k) {
        for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(j)] += pw.w[k] * cur[static_cast<std::size_t>(j)];
        if (k + 1 == pw.w.size()) break;
        // row-vector step through U = I + Q / rate
        for (int j = 0; j < n; ++j) {
            KahanSum sum;
            for (int i = 0; i < n; ++i)
                sum.add(cur[static_cast<std::size_t>(i)] *
                        ((i == j ? 1.0 : 0.0) + chain.Q(i, j) / rate));
            next[static_cast<std::size_t>(j)] = sum.value();
        }
        std::swap(cur, next);
    }
    // spread the series tail uniformly so the vector still sums to 1
    double total = 0.0;
    for (double v : out) total += v;
    if (total > 0.0)
        for (double& v : out) v /= total;
    return out;
}

namespace {

// Gaussian elimination with partial pivoting for the small dense systems of
// stationary-distribution solves.
std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
    std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        if (a[col][col] == 0.0) raise("Singular", "stationary solve hit a singular system");
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            double factor = a[r][col] / a[col][col];
            if (factor == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
            b[r] -= factor * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return x;
}

std::vector<double> stationary_from_generator(const SquareMatrix& gen) {
    // pi gen = 0 with sum(pi) = 1: replace the last equation by the
    // normalization row.
    int n = gen.size();
    std::vector<std::vector<double>> a(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(n), 0.0));
    std::vector<double> b(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n - 1; ++j)
        for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = gen(i, j);
    for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(i)] = 1.0;
    b[static_cast<std::size_t>(n - 1)] = 1.0;
    return solve_dense(std::move(a), std::move(b));
}

} // namespace

std::vector<double> stationary_distribution(const CtmcSpec& chain) {
    return stationary_from_generator(chain.Q);
}

std::vector<double> stationary_distribution(const DtmcSpec& chain) {
    // pi (P - I) = 0
    int n = chain.P.size();
    SquareMatrix gen(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) gen(i, j) = chain.P(i, j) - (i == j ? 1.0 : 0.0);
    return stationary_from_generator(gen);
}

EntropyDecomposition entropy_decomposition(const Trajectory& traj, const CtmcSpec& chain,
                                           std::span<const double> p0, double t) {
    if (traj.kind != ChainKind::ctmc) raise("WrongKind", "entropy decomposition expects a CTMC path");
    if (t <= 0.0 || t > traj.horizon + 1e-12) raise("BadHorizon", "t must lie in (0, horizon]");
    if (static_cast<int>(p0.size()) != chain.Q.size()) raise("BadDimension", "p0 has wrong length");

    EntropyDecomposition dec;
    dec.t = t;

    int x0 = traj.states.front();
    if (p0[static_cast<std::size_t>(x0)] <= 0.0)
        raise("BadDistribution", "p0 gives the realized initial state zero probability");

    // Jump-wise log ratios up to time t; infinite if a reverse rate vanishes.
    KahanSum edge_sum;
    int xt = x0;
    std::vector<int> visited_states{x0};
    for (std::size_t k = 1; k < traj.states.size(); ++k) {
        if (traj.jump_times[k] > t) break;
        int u = traj.states[k - 1];
        int v = traj.states[k];
        double fwd = chain.Q(u, v);
        double bwd = chain.Q(v, u);
        if (bwd <= 0.0) {
            dec.finite = false;
        } else {
            edge_sum.add(std::log(fwd / bwd));
        }
        xt = v;
        visited_states.push_back(v);
    }

    auto pt = transient_distribution(chain, p0, t);
    if (pt[static_cast<std::size_t>(xt)] <= 0.0) raise("BadDistribution", "p_t vanished at X_t");
    double boundary = std::log(p0[static_cast<std::size_t>(x0)] / pt[static_cast<std::size_t>(xt)]);

    // Net circulation part from the popped cycles of the same path segment.
    std::map<Cycle, long long> counts;
    DerivedState y(chain.Q.size(), x0);
    for (std::size_t k = 1; k < visited_states.size(); ++k)
        if (auto popped = y.advance(visited_states[k])) ++counts[*popped];

    ChainSpec spec{chain};
    KahanSum cycle_sum;
    for (const auto& [cycle, n_fwd] : counts) {
        Cycle rev = cycle.reversed();
        if (cycle == rev) continue; // self-conjugate cycles carry no affinity
        auto it = counts.find(rev);
        long long n_bwd = it != counts.end() ? it->second : 0;
        if (it != counts.end() && rev < cycle) continue; // pair handled at the other entry
        double fwd = cycle_strength(spec, cycle);
        double bwd = cycle_strength(spec, rev);
        if (bwd <= 0.0) {
            dec.finite = false; // the reverse edges also broke the jump product
            continue;
        }
        cycle_sum.add(static_cast<double>(n_fwd - n_bwd) * std::log(fwd / bwd));
    }

    dec.cycle_part = cycle_sum.value() / t;
    if (!dec.finite) {
        dec.total = std::numeric_limits<double>::infinity();
        dec.residual = std::numeric_limits<double>::infinity();
        return dec;
    }
    dec.total = (boundary + edge_sum.value()) / t;
    dec.residual = dec.total - dec.cycle_part;
    return dec;
}

} // namespace cyclecirc
