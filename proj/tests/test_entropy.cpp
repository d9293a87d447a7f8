#include <doctest.h>

#include <cmath>

#include "cyclecirc/entropy.hpp"
#include "oracle_helpers.hpp"

using namespace cyclecirc;

namespace {

CtmcSpec two_state(double a, double b) {
    return validate_chain(StateSpace::indexed(2), {{-a, a}, {b, -b}}, ChainKind::ctmc).ctmc();
}

ChainSpec driven_ctmc4() {
    return validate_chain(StateSpace::indexed(4),
                          {{-2.1, 1.3, 0.3, 0.5},
                           {0.4, -2.2, 1.5, 0.3},
                           {0.6, 0.4, -2.3, 1.3},
                           {1.2, 0.5, 0.4, -2.1}},
                          ChainKind::ctmc);
}

} // namespace

TEST_CASE("transient distribution matches the closed form for two states") {
    auto chain = two_state(1.5, 0.5);
    std::vector<double> p0{1.0, 0.0};
    for (double t : {0.0, 0.1, 0.7, 3.0}) {
        auto pt = transient_distribution(chain, p0, t);
        double pi0 = 0.5 / 2.0; // b / (a+b)
        double expected0 = pi0 + (1.0 - pi0) * std::exp(-2.0 * t);
        CHECK(pt[0] == doctest::Approx(expected0).epsilon(1e-10));
        CHECK(pt[0] + pt[1] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("stationary distributions annihilate the generator") {
    auto ctmc = oracle::random_ctmc(5, 12);
    auto pi = stationary_distribution(ctmc);
    double total = 0.0;
    for (int j = 0; j < 5; ++j) {
        double flow = 0.0;
        for (int i = 0; i < 5; ++i) flow += pi[static_cast<std::size_t>(i)] * ctmc.Q(i, j);
        CHECK(std::abs(flow) < 1e-12);
        total += pi[static_cast<std::size_t>(j)];
        CHECK(pi[static_cast<std::size_t>(j)] > 0.0);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    auto dtmc = oracle::random_dtmc(4, 13);
    auto pid = stationary_distribution(dtmc);
    for (int j = 0; j < 4; ++j) {
        double flow = 0.0;
        for (int i = 0; i < 4; ++i) flow += pid[static_cast<std::size_t>(i)] * dtmc.P(i, j);
        CHECK(flow == doctest::Approx(pid[static_cast<std::size_t>(j)]).epsilon(1e-10));
    }
}

TEST_CASE("reversible chain in stationarity produces no entropy") {
    auto chain = validate_chain(StateSpace::indexed(3), {{-2, 1, 1}, {1, -2, 1}, {1, 1, -2}},
                                ChainKind::ctmc);
    auto pi = stationary_distribution(chain.ctmc());
    double mean_total = 0.0;
    const int replicas = 60;
    const double t = 40.0;
    for (int r = 0; r < replicas; ++r) {
        Philox rng(500, static_cast<std::uint64_t>(r));
        auto traj = simulate_ctmc(chain.ctmc(), r % 3, t, rng);
        std::vector<double> p0 = pi;
        p0[static_cast<std::size_t>(traj.states.front())] = pi[static_cast<std::size_t>(traj.states.front())];
        auto dec = entropy_decomposition(traj, chain.ctmc(), pi, t);
        CHECK(dec.finite);
        CHECK(dec.cycle_part == 0.0); // every affinity vanishes
        mean_total += dec.total;
    }
    CHECK(std::abs(mean_total / replicas) < 0.05);
}

TEST_CASE("a closed excursion leaves only the boundary term in the residual") {
    auto chain = two_state(1.0, 1.0);
    Trajectory traj;
    traj.kind = ChainKind::ctmc;
    traj.states = {0, 1, 0};
    traj.jump_times = {0.0, 0.4, 1.1};
    traj.horizon = 2.0;
    std::vector<double> p0{0.7, 0.3};
    auto dec = entropy_decomposition(traj, chain, p0, 2.0);
    CHECK(dec.finite);
    CHECK(dec.cycle_part == 0.0); // the popped 2-cycle is self-conjugate
    auto pt = transient_distribution(chain, p0, 2.0);
    double boundary = std::log(p0[0] / pt[0]) / 2.0; // symmetric rates cancel edge terms
    CHECK(dec.total == doctest::Approx(boundary).epsilon(1e-12));
    CHECK(dec.residual == doctest::Approx(boundary).epsilon(1e-12));
}

TEST_CASE("one-directional edges make the entropy production infinite, reported not thrown") {
    auto ring = validate_chain(StateSpace::indexed(3), {{-1, 1, 0}, {0, -1, 1}, {1, 0, -1}},
                               ChainKind::ctmc);
    Philox rng(9, 0);
    auto traj = simulate_ctmc(ring.ctmc(), 0, 10.0, rng);
    std::vector<double> p0{1.0, 0.0, 0.0};
    auto dec = entropy_decomposition(traj, ring.ctmc(), p0, 10.0);
    CHECK_FALSE(dec.finite);
    CHECK(std::isinf(dec.total));
}

TEST_CASE("residual entropy decays like 1/t and the cycle part carries the rate") {
    auto chain = driven_ctmc4();
    const auto& ctmc = chain.ctmc();
    auto pi = stationary_distribution(ctmc);

    double max_edge_log_ratio = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j && ctmc.Q(i, j) > 0.0 && ctmc.Q(j, i) > 0.0)
                max_edge_log_ratio =
                    std::max(max_edge_log_ratio, std::abs(std::log(ctmc.Q(i, j) / ctmc.Q(j, i))));

    const int replicas = 40;
    for (double t : {30.0, 60.0, 120.0}) {
        double worst_scaled_residual = 0.0;
        double mean_res = 0.0, mean_sq = 0.0;
        for (int r = 0; r < replicas; ++r) {
            Philox rng(808, static_cast<std::uint64_t>(r));
            auto traj = simulate_ctmc(ctmc, 0, t, rng);
            auto dec = entropy_decomposition(traj, ctmc, pi, t);
            REQUIRE(dec.finite);
            worst_scaled_residual = std::max(worst_scaled_residual, std::abs(dec.residual) * t);
            mean_res += dec.residual;
            mean_sq += dec.residual * dec.residual;
        }
        // |W_t - cycle part| * t is bounded by the leftover stack plus boundary
        double boundary_slack = 0.0;
        for (double a : pi)
            for (double b : pi) boundary_slack = std::max(boundary_slack, std::abs(std::log(a / b)));
        CHECK(worst_scaled_residual <= 4.0 * max_edge_log_ratio + boundary_slack + 1e-9);

        mean_res /= replicas;
        double sd = std::sqrt(std::max(0.0, mean_sq / replicas - mean_res * mean_res));
        // W_t converges to the cycle part: the residual mean sits within noise of 0
        CHECK(std::abs(mean_res) <= 4.0 * sd / std::sqrt(static_cast<double>(replicas)) + 5.0 / t);
    }
}
