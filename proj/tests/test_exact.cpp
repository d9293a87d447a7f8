#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cyclecirc/exact.hpp"
#include "cyclecirc/simulate.hpp"
#include "oracle_helpers.hpp"

using namespace cyclecirc;

namespace {

// 3-state single-loop enzyme-style chain with distinct rates in each direction
ChainSpec enzyme_ctmc() {
    return validate_chain(StateSpace({"E", "ES", "EP"}),
                          {{-2.5, 2.0, 0.5}, {1.0, -2.5, 1.5}, {1.2, 0.8, -2.0}}, ChainKind::ctmc);
}

} // namespace

TEST_CASE("augmented chain enumerates the reachable stacks") {
    auto chain = oracle::random_dtmc(4, 1, false);
    AugmentedChain aug(chain, 0);
    // stacks starting at 0 over 4 states: 1 + 3 + 3*2 + 3*2*1 = 16
    CHECK(aug.size() == 16);
    CHECK(aug.node(aug.root()).stack == std::vector<int>{0});
    for (int v = 0; v < aug.size(); ++v) {
        CHECK(aug.node(v).stack.front() == 0); // the bottom never changes
        CHECK(aug.node(v).top == aug.node(v).stack.back());
    }
}

TEST_CASE("exact forming distribution matches brute-force path enumeration") {
    auto chain = oracle::random_dtmc(4, 21);
    std::vector<Cycle> watched{Cycle({0, 1, 2}), Cycle({0, 2, 1}), Cycle({0, 3})};
    const int n_max = 8;
    auto dist = exact_forming_dist(chain, watched, 0, n_max);
    auto brute = oracle::forming_dist_brute(chain, watched, 0, n_max);
    for (std::size_t k = 0; k < watched.size(); ++k)
        for (int n = 1; n <= n_max; ++n)
            CHECK(dist.bucket(static_cast<int>(k), n) ==
                  doctest::Approx(brute[k][static_cast<std::size_t>(n)]).epsilon(1e-12));
}

TEST_CASE("a zero-strength watched cycle collects no mass") {
    // ring chain: (0,2,1) direction has strength 0
    auto ring = validate_chain(StateSpace::indexed(3), {{0, 1, 0}, {0, 0, 1}, {1, 0, 0}},
                               ChainKind::dtmc);
    auto dist = exact_forming_dist(ring.dtmc(), {Cycle({0, 2, 1})}, 0, 30);
    for (int n = 1; n <= 30; ++n) CHECK(dist.bucket(0, n) == 0.0);
    CHECK(dist.tail_mass() == doctest::Approx(1.0));
}

TEST_CASE("watched mass approaches 1 as the horizon grows") {
    auto chain = enzyme_ctmc().embedded();
    std::vector<Cycle> watched{Cycle({0, 1, 2}), Cycle({0, 2, 1})};
    double prev_tail = 1.0;
    for (int n_max : {10, 20, 40, 80}) {
        auto dist = exact_forming_dist(chain, watched, 0, n_max);
        CHECK(dist.tail_mass() < prev_tail);
        prev_tail = dist.tail_mass();
        double total = dist.total(0) + dist.total(1) + dist.tail_mass();
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(prev_tail < 1e-6);
}

TEST_CASE("forming-time buckets scale like the strength ratio for similar cycles") {
    auto chain = oracle::random_dtmc(4, 33);
    ChainSpec spec(chain);
    auto family = oracle::all_full_cycles(4);
    REQUIRE(family.size() == 6);
    auto dist = exact_forming_dist(chain, family, 0, 40);
    std::vector<double> gamma;
    for (const auto& c : family) gamma.push_back(cycle_strength(spec, c));
    for (std::size_t k = 0; k < family.size(); ++k)
        for (std::size_t l = 0; l < family.size(); ++l) {
            if (k == l) continue;
            for (int n = 1; n <= 40; ++n) {
                double bl = dist.bucket(static_cast<int>(l), n);
                if (bl <= 1e-12) continue;
                double ratio = dist.bucket(static_cast<int>(k), n) / bl;
                CHECK(std::abs(ratio - gamma[k] / gamma[l]) <= 1e-10 * std::max(1.0, gamma[k] / gamma[l]));
            }
        }
}

TEST_CASE("exact_forming_dist rejects families without a common state") {
    auto chain = oracle::random_dtmc(5, 3);
    CHECK_THROWS_WITH_AS(exact_forming_dist(chain, {Cycle({0, 1}), Cycle({2, 3})}, 0, 10),
                         doctest::Contains("NoCommonState"), Error);
}

TEST_CASE("poisson weights sum to one within the tail") {
    for (double mu : {0.0, 0.3, 5.0, 40.0}) {
        auto pw = poisson_weights(mu, 1e-12);
        double sum = 0.0;
        for (double w : pw.w) sum += w;
        CHECK(sum + pw.tail == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(pw.tail <= 1e-12);
    }
}

TEST_CASE("count law at horizon zero is a point mass at zero counts") {
    auto chain = enzyme_ctmc();
    Cycle c({0, 1, 2});
    auto dist = exact_count_dist(chain, {c, c.reversed()}, 0, 0.0, {5, 5});
    std::vector<int> zero{0, 0};
    CHECK(dist.mass(zero) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dist.total_mass() + dist.trunc_mass() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("a zero-strength cycle has a point-mass count marginal") {
    auto ring = validate_chain(StateSpace::indexed(3), {{-1, 1, 0}, {0, -1, 1}, {1, 0, -1}},
                               ChainKind::ctmc);
    Cycle fwd({0, 1, 2});
    auto dist = exact_count_dist(ring, {fwd, fwd.reversed()}, 0, 4.0, {10, 10});
    double reverse_mass = 0.0;
    dist.for_each_cell([&](std::span<const int> counts, double m) {
        if (counts[1] > 0) reverse_mass += m;
    });
    CHECK(reverse_mass == 0.0);
    CHECK(dist.total_mass() + dist.trunc_mass() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("DTMC count law matches brute-force path enumeration cell by cell") {
    auto chain = oracle::random_dtmc(4, 77);
    ChainSpec spec(chain);
    Cycle c({0, 1, 2});
    std::vector<Cycle> watched{c, c.reversed()};
    const int n = 8;
    auto dist = exact_count_dist(spec, watched, 0, static_cast<double>(n), {8, 8});
    auto brute = oracle::count_dist_brute(chain, watched, 0, n);
    double checked = 0.0;
    for (const auto& [counts, prob] : brute) {
        CHECK(dist.mass(counts) == doctest::Approx(prob).epsilon(1e-12));
        checked += prob;
    }
    CHECK(checked == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dist.trunc_mass() <= 1e-15);
}

TEST_CASE("count-swap symmetry of the exact CTMC count law") {
    auto chain = enzyme_ctmc();
    Cycle c({0, 1, 2});
    double gamma_fwd = cycle_strength(chain, c);
    double gamma_bwd = cycle_strength(chain, c.reversed());
    auto dist = exact_count_dist(chain, {c, c.reversed()}, 0, 3.0, {15, 15});
    CHECK(dist.total_mass() + dist.trunc_mass() == doctest::Approx(1.0).epsilon(1e-10));
    int cells = 0;
    dist.for_each_cell([&](std::span<const int> counts, double m) {
        if (m <= 1e-12) return;
        std::vector<int> swapped{counts[1], counts[0]};
        double m_swapped = dist.mass(swapped);
        if (m_swapped <= 1e-12) return;
        double expected = std::pow(gamma_fwd / gamma_bwd, counts[0] - counts[1]);
        CHECK(m / m_swapped == doctest::Approx(expected).epsilon(1e-8));
        ++cells;
    });
    CHECK(cells > 20);
}

TEST_CASE("count caps overflow into reported truncation mass") {
    auto chain = enzyme_ctmc();
    Cycle c({0, 1, 2});
    auto dist = exact_count_dist(chain, {c, c.reversed()}, 0, 6.0, {1, 1});
    CHECK(dist.trunc_mass() > 1e-3); // plenty of paths form the loop twice
    CHECK(dist.total_mass() + dist.trunc_mass() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("count law requires the start to sit on every watched cycle") {
    auto chain = ChainSpec(oracle::random_ctmc(4, 9));
    CHECK_THROWS_WITH_AS(exact_count_dist(chain, {Cycle({1, 2, 3})}, 0, 1.0, {5}),
                         doctest::Contains("NoCommonState"), Error);
}

TEST_CASE("Monte Carlo count frequencies sit inside 4-sigma oracle bands") {
    auto chain = enzyme_ctmc();
    Cycle c({0, 1, 2});
    const double t = 2.0;
    auto dist = exact_count_dist(chain, {c, c.reversed()}, 0, t, {12, 12});

    BatchOptions opt;
    opt.replicas = 20000;
    opt.seed = 31337;
    auto batch = batch_sample(chain, 0, t, {c}, opt);
    std::map<std::pair<long long, long long>, long long> freq;
    for (const auto& s : batch.samples) ++freq[{s.counts[0], s.conjugate_counts[0]}];

    double R = static_cast<double>(opt.replicas);
    int cells = 0;
    dist.for_each_cell([&](std::span<const int> counts, double p) {
        if (p < 2e-4) return;
        auto it = freq.find({counts[0], counts[1]});
        double observed = it == freq.end() ? 0.0 : static_cast<double>(it->second) / R;
        double sigma = std::sqrt(p * (1.0 - p) / R);
        CHECK(std::abs(observed - p) <= 4.0 * sigma + 1e-12);
        ++cells;
    });
    CHECK(cells >= 7);
}

TEST_CASE("generating function at lambda = 0 returns total mass") {
    auto chain = enzyme_ctmc();
    Cycle c({0, 1, 2});
    auto dist = exact_count_dist(chain, {c, c.reversed()}, 0, 2.0, {12, 12});
    std::vector<double> zero{0.0, 0.0};
    auto g = exact_generating(dist, zero);
    CHECK(g.value == doctest::Approx(1.0 - dist.trunc_mass()).epsilon(1e-12));
}

TEST_CASE("generating function tends to P(N = 0) as lambda goes to minus infinity") {
    auto chain = enzyme_ctmc();
    Cycle c({0, 1, 2});
    auto dist = exact_count_dist(chain, {c}, 0, 1.0, {10});
    std::vector<int> zero{0};
    std::vector<double> lam{-40.0};
    auto g = exact_generating(dist, lam);
    CHECK(g.value == doctest::Approx(dist.mass(zero)).epsilon(1e-10));
}

TEST_CASE("generating function count-swap symmetry at finite horizon") {
    auto chain = enzyme_ctmc();
    Cycle c({0, 1, 2});
    double delta = std::log(cycle_strength(chain, c) / cycle_strength(chain, c.reversed()));
    auto dist = exact_count_dist(chain, {c, c.reversed()}, 0, 2.0, {18, 18});
    double tol = 10.0 * std::max(dist.trunc_mass(), 1e-13);
    for (double l1 : {-0.5, 0.0, 0.4}) {
        for (double l2 : {-0.3, 0.2}) {
            std::vector<double> lhs{l1, l2};
            std::vector<double> rhs{l2 - delta, l1 + delta};
            auto a = exact_generating(dist, lhs);
            auto b = exact_generating(dist, rhs);
            CHECK(std::abs(a.value - b.value) <=
                  tol * std::max(1.0, std::max(a.value, b.value)) + a.trunc_error + b.trunc_error);
        }
    }
}

TEST_CASE("generating function flags overflow") {
    auto chain = enzyme_ctmc();
    Cycle c({0, 1, 2});
    auto dist = exact_count_dist(chain, {c}, 0, 1.0, {30});
    std::vector<double> lam{50.0};
    CHECK_THROWS_WITH_AS(exact_generating(dist, lam), doctest::Contains("Overflow"), Error);
}

TEST_CASE("net count law collapses conjugate pairs") {
    auto chain = enzyme_ctmc();
    Cycle c({0, 1, 2});
    auto joint = exact_count_dist(chain, with_conjugates({c}), 0, 2.0, {10, 10});
    auto net = net_count_dist(joint);
    double total = 0.0;
    for (const auto& [diff, m] : net.mass) total += m;
    CHECK(total == doctest::Approx(joint.total_mass()).epsilon(1e-12));
    // K and -K cells both present for this two-way loop
    CHECK(net.mass.count(std::vector<int>{1}) == 1);
    CHECK(net.mass.count(std::vector<int>{-1}) == 1);
}

TEST_CASE("count law CSV dump carries the header and parses back") {
    auto chain = enzyme_ctmc();
    Cycle c({0, 1, 2});
    auto dist = exact_count_dist(chain, {c, c.reversed()}, 0, 1.0, {4, 4});
    std::ostringstream out;
    dump_count_dist_csv(dist, out);
    std::string text = out.str();
    CHECK(text.find("# horizon=1 caps=4;4 trunc_mass=") == 0);
    CHECK(text.find("n_1,n_2,probability\n") != std::string::npos);
    CHECK(text.find("0,0,") != std::string::npos);
}
