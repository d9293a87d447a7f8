#include "cyclecirc/haldane.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "cyclecirc/report.hpp"
#include "cyclecirc/rng.hpp"
#include "cyclecirc/simulate.hpp"
#include "cyclecirc/stats.hpp"

namespace cyclecirc {

namespace {

using nlohmann::json;

bool pairwise_similar(const std::vector<Cycle>& family) {
    for (std::size_t a = 0; a < family.size(); ++a)
        for (std::size_t b = a + 1; b < family.size(); ++b)
            if (!is_similar(family[a], family[b])) return false;
    return true;
}

// Thm-level preconditions: a pairwise-similar family works from any start;
// otherwise every cycle must pass through the start state.
void check_family(const std::vector<Cycle>& family, int start) {
    if (family.size() < 2) raise("NotSimilar", "need at least two cycles to compare");
    if (pairwise_similar(family)) return;
    if (common_states(family).empty())
        raise("NoCommonState", "cycles are not similar and share no common state");
    if (!all_pass_through(family, start))
        raise("NoCommonState",
              "non-similar family: the start state must be the common state");
}

std::string family_text(const std::vector<Cycle>& family, const StateSpace& states) {
    std::string out;
    for (std::size_t k = 0; k < family.size(); ++k) {
        if (k) out += ',';
        out += format_cycle(family[k], states);
    }
    return out;
}

struct FirstEventSamples {
    std::vector<long long> counts;              // events per cycle
    std::vector<std::vector<double>> times;     // conditional forming times per cycle
    long long missing = 0;                      // replicas with no event in budget
};

FirstEventSamples sample_first_events(const ChainSpec& chain, const std::vector<Cycle>& family,
                                      int start, const HaldaneParams& params) {
    FirstEventSamples out;
    out.counts.assign(family.size(), 0);
    out.times.assign(family.size(), {});
    std::vector<std::optional<FirstEvent>> events(static_cast<std::size_t>(params.replicas));

    int workers = static_cast<int>(std::min<long long>(resolve_workers(params.workers), params.replicas));
    std::atomic<long long> next{0};
    auto work = [&] {
        for (;;) {
            long long r = next.fetch_add(1);
            if (r >= params.replicas) return;
            Philox rng(params.seed, static_cast<std::uint64_t>(r));
            events[static_cast<std::size_t>(r)] =
                sample_first_event(chain, family, start, rng, params.max_steps);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    for (const auto& ev : events) {
        if (!ev) {
            ++out.missing;
            continue;
        }
        ++out.counts[static_cast<std::size_t>(ev->which)];
        out.times[static_cast<std::size_t>(ev->which)].push_back(ev->time);
    }
    return out;
}

} // namespace

std::vector<double> exact_pick_probabilities(const ChainSpec& chain, const std::vector<Cycle>& family) {
    if (!pairwise_similar(family))
        raise("NotSimilar", "pick probabilities are exact only for similar families");
    std::vector<double> gamma;
    double total = 0.0;
    for (const auto& c : family) {
        gamma.push_back(cycle_strength(chain, c));
        total += gamma.back();
    }
    if (total <= 0.0) raise("ZeroForwardStrength", "every cycle in the family has strength 0");
    for (auto& g : gamma) g /= total;
    return gamma;
}

HaldaneReport haldane_test(const ChainSpec& chain, const std::vector<Cycle>& family, int start,
                           TestMode mode, const HaldaneParams& params) {
    check_family(family, start);
    HaldaneReport report;
    report.mode = mode;
    report.family = family_text(family, chain.states());
    report.start = start;
    report.significance = params.significance;
    for (const auto& c : family) report.strengths.push_back(cycle_strength(chain, c));

    std::vector<std::pair<int, int>> similar_pairs;
    for (std::size_t k = 0; k < family.size(); ++k)
        for (std::size_t l = k + 1; l < family.size(); ++l)
            if (is_similar(family[k], family[l]))
                similar_pairs.emplace_back(static_cast<int>(k), static_cast<int>(l));
    if (similar_pairs.empty()) raise("NotSimilar", "family contains no similar pair");
    report.pair_alpha = params.significance / static_cast<double>(similar_pairs.size());

    if (mode == TestMode::exact) {
        report.t_or_nmax = params.n_max;
        FormingDist dist = exact_forming_dist(chain.embedded(), family, start, params.n_max);
        report.tail_mass = dist.tail_mass();
        for (auto [k, l] : similar_pairs) {
            HaldanePairStat stat;
            stat.k = k;
            stat.l = l;
            stat.theoretical_ratio = report.strengths[static_cast<std::size_t>(k)] /
                                     report.strengths[static_cast<std::size_t>(l)];
            double tot_l = dist.total(l);
            stat.ratio = tot_l > 0.0 ? dist.total(k) / tot_l : 0.0;
            for (int n = 1; n <= dist.n_max(); ++n) {
                double bl = dist.bucket(l, n);
                if (bl <= params.cell_floor) continue;
                double cell_ratio = dist.bucket(k, n) / bl;
                double dev = std::abs(cell_ratio - stat.theoretical_ratio) /
                             std::max(stat.theoretical_ratio, 1e-300);
                stat.max_cell_deviation = std::max(stat.max_cell_deviation, dev);
                ++stat.cells_compared;
            }
            stat.passed = stat.max_cell_deviation <= params.exact_tol && stat.cells_compared > 0;
            report.rejected = report.rejected || !stat.passed;
            report.pairs.push_back(std::move(stat));
        }
        return report;
    }

    auto samples = sample_first_events(chain, family, start, params);
    report.event_counts = samples.counts;
    double z = normal_quantile(1.0 - report.pair_alpha / 2.0);
    for (auto [k, l] : similar_pairs) {
        HaldanePairStat stat;
        stat.k = k;
        stat.l = l;
        stat.theoretical_ratio = report.strengths[static_cast<std::size_t>(k)] /
                                 report.strengths[static_cast<std::size_t>(l)];
        double nk = static_cast<double>(samples.counts[static_cast<std::size_t>(k)]);
        double nl = static_cast<double>(samples.counts[static_cast<std::size_t>(l)]);
        if (nk == 0.0 || nl == 0.0) {
            stat.ratio = nk / std::max(nl, 1.0);
            stat.passed = stat.theoretical_ratio == 0.0 ? nk == 0.0 : false;
        } else {
            stat.ratio = nk / nl;
            stat.log_ratio_se = std::sqrt(1.0 / nk + 1.0 / nl);
            bool ratio_ok = std::abs(std::log(stat.ratio) - std::log(stat.theoretical_ratio)) <=
                            z * stat.log_ratio_se;
            auto ks = ks_two_sample(samples.times[static_cast<std::size_t>(k)],
                                    samples.times[static_cast<std::size_t>(l)]);
            stat.ks_statistic = ks.statistic;
            stat.ks_p_value = ks.p_value;
            stat.passed = ratio_ok && ks.p_value >= report.pair_alpha;
        }
        report.rejected = report.rejected || !stat.passed;
        report.pairs.push_back(std::move(stat));
    }
    return report;
}

IndependenceReport independence_test(const ChainSpec& chain, const std::vector<Cycle>& family,
                                     int start, TestMode mode, const HaldaneParams& params) {
    if (family.empty()) raise("NotSimilar", "need at least one cycle");
    IndependenceReport report;
    report.mode = mode;
    report.family = family_text(family, chain.states());
    report.start = start;
    if (family.size() == 1) return report; // which-cycle is constant: independent

    if (!pairwise_similar(family))
        raise("NotSimilar", "independence holds for similar families");

    if (mode == TestMode::exact) {
        auto pick = exact_pick_probabilities(chain, family);
        FormingDist dist = exact_forming_dist(chain.embedded(), family, start, params.n_max);
        for (int n = 1; n <= dist.n_max(); ++n) {
            double marginal = dist.time_marginal(n);
            for (std::size_t k = 0; k < family.size(); ++k) {
                double residual =
                    std::abs(dist.bucket(static_cast<int>(k), n) - marginal * pick[k]);
                report.max_residual = std::max(report.max_residual, residual);
            }
        }
        report.rejected = report.max_residual > params.exact_tol;
        return report;
    }

    auto samples = sample_first_events(chain, family, start, params);
    // Bin T by pooled quantiles, then chi-square the (bin x cycle) table.
    std::vector<double> pooled;
    for (const auto& ts : samples.times) pooled.insert(pooled.end(), ts.begin(), ts.end());
    if (pooled.size() < 16) raise("EmptySample", "too few events for the independence test");
    std::sort(pooled.begin(), pooled.end());
    int bins = std::min<int>(8, static_cast<int>(pooled.size() / 8));
    std::vector<double> edges;
    for (int b = 1; b < bins; ++b)
        edges.push_back(pooled[pooled.size() * static_cast<std::size_t>(b) / static_cast<std::size_t>(bins)]);
    std::vector<std::vector<long long>> table(static_cast<std::size_t>(bins),
                                              std::vector<long long>(family.size(), 0));
    for (std::size_t k = 0; k < family.size(); ++k)
        for (double t : samples.times[k]) {
            std::size_t bin = static_cast<std::size_t>(
                std::upper_bound(edges.begin(), edges.end(), t) - edges.begin());
            ++table[bin][k];
        }
    auto chi = chi_square_independence(table);
    report.chi_square = chi.statistic;
    report.p_value = chi.p_value;
    report.dof = chi.dof;
    report.rejected = chi.p_value < params.significance;
    return report;
}

std::string HaldaneReport::to_json(const std::string& input_digest) const {
    json j;
    j["test"] = "haldane";
    j["version"] = std::string(kLibraryVersion);
    j["input_digest"] = input_digest;
    j["mode"] = mode == TestMode::exact ? "exact" : "mc";
    j["family"] = family;
    j["start"] = start;
    j["significance"] = significance;
    j["pair_alpha"] = pair_alpha;
    j["strengths"] = strengths;
    if (!event_counts.empty()) j["event_counts"] = event_counts;
    if (mode == TestMode::exact) j["tail_mass"] = tail_mass;
    json pj = json::array();
    for (const auto& p : pairs) {
        json e;
        e["k"] = p.k;
        e["l"] = p.l;
        e["theoretical_ratio"] = p.theoretical_ratio;
        e["ratio"] = p.ratio;
        if (mode == TestMode::mc) {
            e["log_ratio_se"] = p.log_ratio_se;
            e["ks_statistic"] = p.ks_statistic;
            e["ks_p_value"] = p.ks_p_value;
        } else {
            e["max_cell_deviation"] = p.max_cell_deviation;
            e["cells_compared"] = p.cells_compared;
        }
        e["passed"] = p.passed;
        pj.push_back(std::move(e));
    }
    j["pairs"] = std::move(pj);
    j["verdict"] = rejected ? "reject" : "pass";
    return j.dump(2);
}

std::string IndependenceReport::to_json(const std::string& input_digest) const {
    json j;
    j["test"] = "independence";
    j["version"] = std::string(kLibraryVersion);
    j["input_digest"] = input_digest;
    j["mode"] = mode == TestMode::exact ? "exact" : "mc";
    j["family"] = family;
    j["start"] = start;
    if (mode == TestMode::exact) {
        j["max_residual"] = max_residual;
    } else {
        j["chi_square"] = chi_square;
        j["p_value"] = p_value;
        j["dof"] = dof;
    }
    j["verdict"] = rejected ? "reject" : "pass";
    return j.dump(2);
}

} // namespace cyclecirc
