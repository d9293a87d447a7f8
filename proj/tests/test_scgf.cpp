#include <doctest.h>

#include <cmath>

#include "cyclecirc/exact.hpp"
#include "cyclecirc/scgf.hpp"
#include "cyclecirc/simulate.hpp"
#include "oracle_helpers.hpp"

using namespace cyclecirc;

namespace {

ChainSpec enzyme_ctmc() {
    return validate_chain(StateSpace({"E", "ES", "EP"}),
                          {{-2.5, 2.0, 0.5}, {1.0, -2.5, 1.5}, {1.2, 0.8, -2.0}}, ChainKind::ctmc);
}

// gently driven ring: both net-circulation signs show up at moderate horizons
ChainSpec mild_ring_ctmc() {
    return validate_chain(StateSpace::indexed(3),
                          {{-2.2, 1.2, 1.0}, {1.0, -2.2, 1.2}, {1.2, 1.0, -2.2}}, ChainKind::ctmc);
}

std::vector<std::vector<double>> circulation_obs(const ChainSpec& chain, const Cycle& c, double t,
                                                 long long replicas, std::uint64_t seed, bool net) {
    BatchOptions opt;
    opt.replicas = replicas;
    opt.seed = seed;
    auto batch = batch_sample(chain, 0, t, {c}, opt);
    std::vector<std::vector<double>> obs;
    obs.reserve(batch.samples.size());
    for (const auto& s : batch.samples)
        obs.push_back({net ? s.net_circulation(0) : s.circulation(0)});
    return obs;
}

} // namespace

TEST_CASE("scgf estimate is exactly zero at lambda = 0") {
    auto obs = circulation_obs(enzyme_ctmc(), Cycle({0, 1, 2}), 5.0, 500, 3, false);
    auto est = scgf_estimate(obs, 5.0, {{0.0}});
    CHECK(est.value[0] == 0.0);
    CHECK(est.std_error[0] == 0.0);
}

TEST_CASE("scgf estimate is nondecreasing and convex for a nonnegative observable") {
    auto obs = circulation_obs(enzyme_ctmc(), Cycle({0, 1, 2}), 10.0, 4000, 11, false);
    std::vector<std::vector<double>> grid;
    std::vector<double> lambdas;
    for (double l = -1.0; l <= 1.0 + 1e-9; l += 0.25) {
        grid.push_back({l});
        lambdas.push_back(l);
    }
    auto est = scgf_estimate(obs, 10.0, grid);
    for (std::size_t g = 1; g < est.value.size(); ++g) CHECK(est.value[g] >= est.value[g - 1] - 1e-12);
    CHECK(convex_on_grid(lambdas, est.value, 1e-9));
}

TEST_CASE("scgf flags degenerate tails instead of reporting a clean number") {
    auto obs = circulation_obs(enzyme_ctmc(), Cycle({0, 1, 2}), 20.0, 200, 5, false);
    auto est = scgf_estimate(obs, 20.0, {{4.0}});
    REQUIRE(est.ess.size() == 1);
    CHECK(est.ess[0] < 10.0);
    CHECK(est.degenerate == std::vector<int>{0});
}

TEST_CASE("mc scgf agrees with the exact generating function at a short horizon") {
    auto chain = enzyme_ctmc();
    Cycle c({0, 1, 2});
    const double t = 2.0;
    auto joint = exact_count_dist(chain, with_conjugates({c}), 0, t, {15, 15});
    auto obs = circulation_obs(chain, c, t, 40000, 99, true);
    for (double l : {-0.4, 0.2, 0.5}) {
        std::vector<double> expanded{l, -l};
        auto g = exact_generating(joint, expanded);
        double exact_value = std::log(g.value) / t;
        auto est = scgf_estimate(obs, t, {{l}});
        CHECK(std::abs(est.value[0] - exact_value) <= 4.0 * est.std_error[0] + 1e-6);
    }
}

TEST_CASE("legendre transform of a quadratic is the quadratic") {
    std::vector<double> lambda, f, x;
    for (double l = -3.0; l <= 3.0 + 1e-9; l += 0.01) {
        lambda.push_back(l);
        f.push_back(0.5 * l * l);
    }
    for (double v = -2.0; v <= 2.0 + 1e-9; v += 0.25) x.push_back(v);
    auto I = legendre_fenchel_1d(lambda, f, x);
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(std::abs(I[i] - 0.5 * x[i] * x[i]) <= 0.01 * 0.01); // O(grid^2)
    CHECK(convex_on_grid(x, I, 1e-12));
}

TEST_CASE("legendre transform of |lambda| hits the grid-max sentinel outside [-1,1]") {
    std::vector<double> lambda, f;
    const double L = 5.0;
    for (double l = -L; l <= L + 1e-9; l += 0.125) {
        lambda.push_back(l);
        f.push_back(std::abs(l));
    }
    std::vector<double> x{-2.0, -0.5, 0.0, 0.5, 2.0};
    auto I = legendre_fenchel_1d(lambda, f, x);
    CHECK(I[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(I[2] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(I[3] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(I[0] == doctest::Approx(L * (2.0 - 1.0))); // capped by the grid edge
    CHECK(I[4] == doctest::Approx(L * (2.0 - 1.0)));
}

TEST_CASE("legendre transform of the Poisson scgf matches the closed form") {
    const double mu = 2.0;
    const double h = 0.05;
    std::vector<double> lambda, f, x;
    for (double l = -2.0; l <= 2.0 + 1e-9; l += h) {
        lambda.push_back(l);
        f.push_back(mu * (std::exp(l) - 1.0));
    }
    for (double v = 0.5; v <= 5.0 + 1e-9; v += 0.25) x.push_back(v);
    auto I = legendre_fenchel_1d(lambda, f, x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        double expected = x[i] * std::log(x[i] / mu) - x[i] + mu;
        CHECK(std::abs(I[i] - expected) <= 2.0 * h);
    }
}

TEST_CASE("double transform returns a convex function at grid resolution") {
    const double h = 0.05;
    std::vector<double> lambda, f;
    for (double l = -2.0; l <= 2.0 + 1e-9; l += h) {
        lambda.push_back(l);
        f.push_back(0.5 * l * l);
    }
    std::vector<double> x;
    for (double v = -2.5; v <= 2.5 + 1e-9; v += h) x.push_back(v);
    auto I = legendre_fenchel_1d(lambda, f, x);
    auto back = legendre_fenchel_1d(x, I, lambda);
    for (std::size_t g = 0; g < lambda.size(); ++g) CHECK(std::abs(back[g] - f[g]) <= 2.0 * h);
}

TEST_CASE("rate function estimate is convex with its minimum near the mean") {
    auto chain = mild_ring_ctmc();
    Cycle c({0, 1, 2});
    const double t = 50.0;
    auto obs = circulation_obs(chain, c, t, 4000, 21, true);
    double mean = 0.0;
    for (const auto& o : obs) mean += o[0];
    mean /= static_cast<double>(obs.size());

    std::vector<std::vector<double>> lgrid;
    for (double l = -0.4; l <= 0.4 + 1e-9; l += 0.05) lgrid.push_back({l});
    auto f = scgf_estimate(obs, t, lgrid);
    std::vector<std::vector<double>> xgrid;
    for (double v = -0.1; v <= 0.1 + 1e-9; v += 0.02) xgrid.push_back({v});
    auto rate = legendre_fenchel(f, xgrid);
    CHECK(rate.convex_ok);
    double at_mean_min = 1e9;
    for (std::size_t i = 0; i < xgrid.size(); ++i) {
        CHECK(rate.value[i] >= -1e-9); // I >= 0 up to roundoff
        if (std::abs(xgrid[i][0] - mean) <= 0.02) at_mean_min = std::min(at_mean_min, rate.value[i]);
    }
    CHECK(at_mean_min <= 0.02); // shallow near the empirical mean
}

TEST_CASE("net-circulation rate symmetry verdict on a mildly driven ring") {
    auto chain = mild_ring_ctmc();
    Cycle c({0, 1, 2});
    std::vector<double> lgrid;
    for (double l = -0.45; l <= 0.45 + 1e-9; l += 0.05) lgrid.push_back(l);
    std::vector<double> xgrid;
    for (double v = -0.06; v <= 0.06 + 1e-9; v += 0.015) xgrid.push_back(v);
    RateSymmetryParams params;
    params.replicas = 4000;
    params.seed = 2;
    auto report = rate_symmetry_check(chain, c, 0, 80.0, lgrid, xgrid, params);
    CHECK(report.passed);
    CHECK(report.points.size() == xgrid.size());
    CHECK(report.median_error_bar > 0.0);
    std::string json = report.to_json("cafebabecafebabe");
    CHECK(json.find("\"criterion\": \"statistical\"") != std::string::npos);
}

TEST_CASE("pair exchange symmetry holds within bars when strengths are equal") {
    auto chain = validate_chain(StateSpace::indexed(3), {{-2, 1, 1}, {1, -2, 1}, {1, 1, -2}},
                                ChainKind::ctmc);
    Cycle a({0, 1, 2});
    std::vector<double> lgrid;
    for (double l = -0.3; l <= 0.3 + 1e-9; l += 0.1) lgrid.push_back(l);
    std::vector<double> xgrid{0.05, 0.1, 0.15};
    RateSymmetryParams params;
    params.replicas = 2000;
    params.seed = 8;
    auto report = rate_symmetry_check_pair(chain, a, a.reversed(), 0, 40.0, lgrid, xgrid, params);
    CHECK(report.log_strength_ratio == doctest::Approx(0.0));
    CHECK(report.passed);
}
