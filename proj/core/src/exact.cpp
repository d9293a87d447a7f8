#include "cyclecirc/exact.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "cyclecirc/report.hpp"
#include "cyclecirc/stats.hpp"

namespace cyclecirc {

namespace {

void require_distinct(const std::vector<Cycle>& cycles) {
    for (std::size_t a = 0; a < cycles.size(); ++a)
        for (std::size_t b = a + 1; b < cycles.size(); ++b)
            if (cycles[a] == cycles[b]) raise("DuplicateCycle", "watched cycles must be distinct");
}

// Maps each augmented edge to the index of the watched cycle it pops, or -1.
std::vector<std::vector<int>> watch_edges(const AugmentedChain& aug, const std::vector<Cycle>& watched) {
    std::vector<std::vector<int>> widx(static_cast<std::size_t>(aug.size()));
    for (int v = 0; v < aug.size(); ++v) {
        const auto& edges = aug.node(v).edges;
        auto& row = widx[static_cast<std::size_t>(v)];
        row.assign(edges.size(), -1);
        for (std::size_t e = 0; e < edges.size(); ++e) {
            if (!edges[e].popped) continue;
            auto it = std::find(watched.begin(), watched.end(), *edges[e].popped);
            if (it != watched.end()) row[e] = static_cast<int>(it - watched.begin());
        }
    }
    return widx;
}

} // namespace

FormingDist::FormingDist(std::vector<Cycle> watched, int start, int n_max)
    : watched_(std::move(watched)), start_(start), n_max_(n_max) {
    buckets_.assign(watched_.size(), std::vector<double>(static_cast<std::size_t>(n_max_) + 1, 0.0));
}

double FormingDist::time_marginal(int n) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < buckets_.size(); ++k) sum += buckets_[k][static_cast<std::size_t>(n)];
    return sum;
}

double FormingDist::total(int k) const {
    KahanSum sum;
    for (double v : buckets_[static_cast<std::size_t>(k)]) sum.add(v);
    return sum.value();
}

FormingDist exact_forming_dist(const DtmcSpec& chain, std::vector<Cycle> watched, int start,
                               int n_max) {
    if (watched.empty()) raise("NoCommonState", "need at least one watched cycle");
    require_distinct(watched);
    if (common_states(watched).empty())
        raise("NoCommonState", "watched cycles do not share a common state");
    if (n_max < 1) raise("BadHorizon", "n_max must be at least 1");

    FormingDist dist(std::move(watched), start, n_max);
    AugmentedChain aug(chain, start);
    auto widx = watch_edges(aug, dist.watched_);

    std::vector<double> cur(static_cast<std::size_t>(aug.size()), 0.0);
    std::vector<double> next(cur.size());
    cur[static_cast<std::size_t>(aug.root())] = 1.0;

    for (int n = 1; n <= n_max; ++n) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int v = 0; v < aug.size(); ++v) {
            double m = cur[static_cast<std::size_t>(v)];
            if (m == 0.0) continue;
            const auto& node = aug.node(v);
            for (std::size_t e = 0; e < node.edges.size(); ++e) {
                const auto& edge = node.edges[e];
                double p = m * chain.P(node.top, edge.to_state);
                if (p == 0.0) continue;
                int k = widx[static_cast<std::size_t>(v)][e];
                if (k >= 0)
                    dist.buckets_[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)] += p;
                else
                    next[static_cast<std::size_t>(edge.target)] += p;
            }
        }
        std::swap(cur, next);
    }
    KahanSum tail;
    for (double m : cur) tail.add(m);
    dist.tail_mass_ = tail.value();
    return dist;
}

double CountDistribution::mass(std::span<const int> counts) const { return mass_[cell_index(counts)]; }

std::size_t CountDistribution::cell_index(std::span<const int> counts) const {
    if (counts.size() != cycles_.size()) raise("BadDimension", "count vector has wrong length");
    std::size_t cell = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] < 0 || counts[k] > caps_[k])
            raise("CapExceeded", "count " + std::to_string(counts[k]) + " outside cap");
        cell += static_cast<std::size_t>(counts[k]) * strides_[k];
    }
    return cell;
}

double CountDistribution::total_mass() const {
    KahanSum sum;
    for (double m : mass_) sum.add(m);
    return sum.value();
}

PoissonWeights poisson_weights(double mu, double tail_tol) {
    if (mu < 0.0) raise("BadHorizon", "Poisson mean must be nonnegative");
    PoissonWeights pw;
    KahanSum cum;
    long long k_cap = static_cast<long long>(mu + 60.0 * std::sqrt(mu + 1.0) + 200.0);
    for (long long k = 0; k <= k_cap; ++k) {
        double logw = -mu + static_cast<double>(k) * std::log(mu > 0.0 ? mu : 1.0) -
                      std::lgamma(static_cast<double>(k) + 1.0);
        double w = mu > 0.0 ? std::exp(logw) : (k == 0 ? 1.0 : 0.0);
        pw.w.push_back(w);
        cum.add(w);
        if (1.0 - cum.value() < tail_tol) break;
    }
    pw.tail = std::max(0.0, 1.0 - cum.value());
    return pw;
}

CountDistribution exact_count_dist(const ChainSpec& chain, const std::vector<Cycle>& cycles,
                                   int start, double horizon, std::vector<int> caps,
                                   double poisson_tail_tol) {
    if (cycles.empty()) raise("NoCommonState", "need at least one watched cycle");
    require_distinct(cycles);
    if (!all_pass_through(cycles, start))
        raise("NoCommonState",
              "start state " + std::to_string(start) + " must lie on every watched cycle");
    if (caps.size() == 1 && cycles.size() > 1) caps.assign(cycles.size(), caps[0]);
    if (caps.size() != cycles.size()) raise("BadDimension", "need one cap per cycle");
    for (int cap : caps)
        if (cap < 1) raise("CapExceeded", "caps must be at least 1");
    if (horizon < 0.0) raise("BadHorizon", "horizon must be nonnegative");

    CountDistribution dist;
    dist.cycles_ = cycles;
    dist.caps_ = caps;
    dist.horizon_ = horizon;
    dist.continuous_ = chain.kind() == ChainKind::ctmc;

    dist.strides_.assign(cycles.size(), 1);
    std::size_t lattice = 1;
    for (std::size_t k = 0; k < cycles.size(); ++k) {
        dist.strides_[k] = lattice;
        lattice *= static_cast<std::size_t>(caps[k]) + 1;
    }

    const DtmcSpec support = chain.embedded();
    AugmentedChain aug(support, start);
    auto widx = watch_edges(aug, cycles);
    std::size_t n_nodes = static_cast<std::size_t>(aug.size());

    std::vector<double> cur(n_nodes * lattice, 0.0);
    std::vector<double> next(cur.size());
    cur[static_cast<std::size_t>(aug.root()) * lattice] = 1.0;

    // One application of the (uniformized) step kernel. edge_prob(v, e) gives
    // the move probability; self_prob(v) the stay-put weight (CTMC only).
    auto apply_step = [&](auto&& edge_prob, auto&& self_prob) {
        double overflow = 0.0;
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t v = 0; v < n_nodes; ++v) {
            const auto& node = aug.node(static_cast<int>(v));
            double stay = self_prob(static_cast<int>(v));
            for (std::size_t cell = 0; cell < lattice; ++cell) {
                double m = cur[v * lattice + cell];
                if (m == 0.0) continue;
                if (stay > 0.0) next[v * lattice + cell] += m * stay;
                for (std::size_t e = 0; e < node.edges.size(); ++e) {
                    double p = m * edge_prob(static_cast<int>(v), e);
                    if (p == 0.0) continue;
                    const auto& edge = node.edges[e];
                    int k = widx[v][e];
                    std::size_t target_cell = cell;
                    if (k >= 0) {
                        std::size_t uk = static_cast<std::size_t>(k);
                        int count = static_cast<int>(cell / dist.strides_[uk]) % (caps[uk] + 1);
                        if (count + 1 > caps[uk]) {
                            overflow += p;
                            continue;
                        }
                        target_cell = cell + dist.strides_[uk];
                    }
                    next[static_cast<std::size_t>(edge.target) * lattice + target_cell] += p;
                }
            }
        }
        std::swap(cur, next);
        return overflow;
    };

    dist.mass_.assign(lattice, 0.0);
    auto marginalize_into = [&](double weight) {
        if (weight == 0.0) return;
        for (std::size_t v = 0; v < n_nodes; ++v)
            for (std::size_t cell = 0; cell < lattice; ++cell)
                dist.mass_[cell] += weight * cur[v * lattice + cell];
    };

    if (!dist.continuous_) {
        long long n_steps = static_cast<long long>(std::llround(horizon));
        const auto& P = support.P;
        double trunc = 0.0;
        for (long long n = 0; n < n_steps; ++n)
            trunc += apply_step(
                [&](int v, std::size_t e) {
                    const auto& node = aug.node(v);
                    return P(node.top, node.edges[e].to_state);
                },
                [](int) { return 0.0; });
        marginalize_into(1.0);
        dist.trunc_mass_ = trunc;
        return dist;
    }

    const CtmcSpec& ctmc = chain.ctmc();
    double uniform_rate = 1.05 * ctmc.max_exit_rate();
    auto pw = poisson_weights(uniform_rate * horizon, poisson_tail_tol);
    std::size_t K = pw.w.size();
    // suffix[j] = weight of the evaluated Poisson terms with at least j steps;
    // the series tail is accounted for once, in full.
    std::vector<double> suffix(K + 1, 0.0);
    for (std::size_t j = K; j-- > 0;) suffix[j] = suffix[j + 1] + pw.w[j];

    double trunc = pw.tail;
    for (std::size_t k = 0; k < K; ++k) {
        marginalize_into(pw.w[k]);
        if (k + 1 >= K) break;
        double overflow = apply_step(
            [&](int v, std::size_t e) {
                const auto& node = aug.node(v);
                return ctmc.Q(node.top, node.edges[e].to_state) / uniform_rate;
            },
            [&](int v) { return 1.0 - ctmc.exit_rate(aug.node(v).top) / uniform_rate; });
        trunc += overflow * suffix[k + 1];
    }
    dist.trunc_mass_ = trunc;
    return dist;
}

GeneratingValue exact_generating(const CountDistribution& dist, std::span<const double> lambda) {
    if (lambda.size() != dist.cycles().size())
        raise("BadDimension", "lambda has wrong length");
    double max_exponent = 0.0;
    for (std::size_t k = 0; k < lambda.size(); ++k)
        max_exponent += std::max(0.0, lambda[k] * static_cast<double>(dist.caps()[k]));
    if (max_exponent > 700.0)
        raise("Overflow", "exp(lambda . caps) is not representable; reduce caps or lambda");

    KahanSum sum;
    dist.for_each_cell([&](std::span<const int> counts, double m) {
        if (m == 0.0) return;
        double dot = 0.0;
        for (std::size_t k = 0; k < lambda.size(); ++k) dot += lambda[k] * counts[k];
        sum.add(m * std::exp(dot));
    });
    return {sum.value(), dist.trunc_mass() * std::exp(max_exponent)};
}

std::vector<Cycle> with_conjugates(const std::vector<Cycle>& cycles) {
    std::vector<Cycle> out;
    out.reserve(cycles.size() * 2);
    for (const auto& c : cycles) {
        out.push_back(c);
        out.push_back(c.reversed());
    }
    return out;
}

NetCountDistribution net_count_dist(const CountDistribution& joint) {
    const auto& cycles = joint.cycles();
    if (cycles.size() % 2 != 0)
        raise("BadDimension", "net counts need an interleaved (cycle, conjugate) family");
    std::size_t r = cycles.size() / 2;
    for (std::size_t k = 0; k < r; ++k)
        if (cycles[2 * k + 1] != cycles[2 * k].reversed())
            raise("BadDimension", "cycle " + std::to_string(2 * k + 1) + " is not the conjugate of " +
                                      std::to_string(2 * k));
    NetCountDistribution net;
    net.horizon = joint.horizon();
    net.trunc_mass = joint.trunc_mass();
    for (std::size_t k = 0; k < r; ++k) net.cycles.push_back(cycles[2 * k]);
    joint.for_each_cell([&](std::span<const int> counts, double m) {
        if (m == 0.0) return;
        std::vector<int> diff(r);
        for (std::size_t k = 0; k < r; ++k) diff[k] = counts[2 * k] - counts[2 * k + 1];
        net.mass[diff] += m;
    });
    return net;
}

void dump_count_dist_csv(const CountDistribution& dist, std::ostream& out) {
    out << "# horizon=" << format_double(dist.horizon()) << " caps=";
    for (std::size_t k = 0; k < dist.caps().size(); ++k) {
        if (k) out << ';';
        out << dist.caps()[k];
    }
    out << " trunc_mass=" << format_double(dist.trunc_mass()) << "\n";
    for (std::size_t k = 0; k < dist.cycles().size(); ++k) out << "n_" << (k + 1) << ",";
    out << "probability\n";
    dist.for_each_cell([&](std::span<const int> counts, double m) {
        if (m == 0.0) return;
        for (int c : counts) out << c << ',';
        out << format_double(m) << "\n";
    });
}

} // namespace cyclecirc
