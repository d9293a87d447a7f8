#include "cyclecirc/fluctuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "cyclecirc/report.hpp"
#include "cyclecirc/simulate.hpp"
#include "cyclecirc/stats.hpp"

namespace cyclecirc {

namespace {

using nlohmann::json;

struct FtSetup {
    std::vector<Cycle> kept;       // cycles with finite affinity
    std::vector<double> affinities;
    std::vector<int> skipped;      // indices into the input list
};

FtSetup split_by_affinity(const ChainSpec& chain, const std::vector<Cycle>& cycles) {
    FtSetup setup;
    for (std::size_t k = 0; k < cycles.size(); ++k) {
        double fwd = cycle_strength(chain, cycles[k]);
        double bwd = cycle_strength(chain, cycles[k].reversed());
        if (fwd <= 0.0 || bwd <= 0.0) {
            setup.skipped.push_back(static_cast<int>(k));
            continue;
        }
        setup.kept.push_back(cycles[k]);
        setup.affinities.push_back(std::log(fwd / bwd));
    }
    if (setup.kept.empty())
        raise("InfiniteAffinity", "every requested cycle has an infinite or undefined affinity");
    return setup;
}

std::vector<int> resolve_caps(const FtParams& params, std::size_t n) {
    std::vector<int> caps = params.caps;
    if (caps.size() == 1 && n > 1) caps.assign(n, caps[0]);
    if (caps.size() != n) raise("BadDimension", "need one cap per tracked cycle");
    return caps;
}

// Net circulations per replica: obs[r][k] = K^{c_k}_t.
std::vector<std::vector<double>> net_samples(const ChainSpec& chain, const std::vector<Cycle>& cycles,
                                             int start, double t, const FtParams& params) {
    BatchOptions opt;
    opt.replicas = params.replicas;
    opt.seed = params.seed;
    opt.workers = params.workers;
    auto batch = batch_sample(chain, start, t, cycles, opt);
    std::vector<std::vector<double>> obs;
    obs.reserve(batch.samples.size());
    for (const auto& s : batch.samples) {
        std::vector<double> row(cycles.size());
        for (std::size_t k = 0; k < cycles.size(); ++k) row[k] = s.net_circulation(static_cast<int>(k));
        obs.push_back(std::move(row));
    }
    return obs;
}

} // namespace

TransientFtReport transient_ft(const ChainSpec& chain, const std::vector<Cycle>& cycles, int start,
                               double t, TestMode mode, const FtParams& params) {
    if (mode != TestMode::exact)
        raise("BadMode", "transient_ft compares exact lattice cells; use mode=exact");
    auto setup = split_by_affinity(chain, cycles);
    TransientFtReport report;
    report.mode = mode;
    report.t = t;
    report.affinities = setup.affinities;
    report.skipped = setup.skipped;

    auto caps = resolve_caps(params, setup.kept.size());
    std::vector<int> joint_caps;
    for (int c : caps) {
        joint_caps.push_back(c);
        joint_caps.push_back(c);
    }
    auto joint = exact_count_dist(chain, with_conjugates(setup.kept), start, t, joint_caps,
                                  params.poisson_tail_tol);
    report.trunc_mass = joint.trunc_mass();
    auto net = net_count_dist(joint);

    std::size_t r = setup.kept.size();
    std::vector<std::vector<double>> fit_x(r), fit_y(r);
    for (const auto& [counts, mass] : net.mass) {
        if (mass < params.cell_floor) continue;
        for (std::size_t k = 0; k < r; ++k) {
            if (counts[k] <= 0) continue; // one side of each mirrored pair
            std::vector<int> mirror = counts;
            mirror[k] = -mirror[k];
            auto it = net.mass.find(mirror);
            if (it == net.mass.end() || it->second < params.cell_floor) continue;
            TransientCell cell;
            cell.net = counts;
            cell.flipped = static_cast<int>(k);
            cell.log_ratio = std::log(mass / it->second);
            cell.target = static_cast<double>(counts[k]) * setup.affinities[k];
            cell.deviation = std::abs(cell.log_ratio - cell.target);
            cell.bound = 10.0 * report.trunc_mass / std::min(mass, it->second) + 1e-10;
            report.max_deviation = std::max(report.max_deviation, cell.deviation);
            if (cell.deviation > cell.bound) report.passed = false;
            bool isolated = true; // pure coordinate-k cells feed the slope fit
            for (std::size_t m = 0; m < r; ++m)
                if (m != k && counts[m] != 0) isolated = false;
            if (isolated) {
                fit_x[k].push_back(static_cast<double>(counts[k]));
                fit_y[k].push_back(cell.log_ratio);
            }
            report.cells.push_back(std::move(cell));
        }
    }
    for (std::size_t k = 0; k < r; ++k)
        report.fitted_affinities.push_back(
            fit_x[k].empty() ? std::numeric_limits<double>::quiet_NaN()
                             : fit_slope_through_origin(fit_x[k], fit_y[k]));
    if (report.cells.empty()) report.passed = false;
    return report;
}

IntegralFtReport integral_ft(const ChainSpec& chain, const std::vector<Cycle>& cycles, int start,
                             double t, TestMode mode, const FtParams& params) {
    auto setup = split_by_affinity(chain, cycles);
    IntegralFtReport report;
    report.mode = mode;
    report.t = t;
    report.skipped = setup.skipped;

    if (mode == TestMode::exact) {
        auto caps = resolve_caps(params, setup.kept.size());
        std::vector<int> joint_caps;
        std::vector<double> lambda;
        for (std::size_t k = 0; k < setup.kept.size(); ++k) {
            joint_caps.push_back(caps[k]);
            joint_caps.push_back(caps[k]);
            lambda.push_back(-setup.affinities[k]);
            lambda.push_back(setup.affinities[k]);
        }
        auto joint = exact_count_dist(chain, with_conjugates(setup.kept), start, t, joint_caps,
                                      params.poisson_tail_tol);
        report.trunc_mass = joint.trunc_mass();
        auto g = exact_generating(joint, lambda);
        report.estimate = g.value;
        double slack = 10.0 * std::max(report.trunc_mass, 1e-15);
        report.lower = 1.0 - slack;
        report.upper = 1.0 + slack;
        report.passed = report.estimate >= report.lower && report.estimate <= report.upper;
        return report;
    }

    auto obs = net_samples(chain, setup.kept, start, t, params);
    std::vector<double> weights;
    weights.reserve(obs.size());
    for (const auto& row : obs) {
        double dot = 0.0;
        for (std::size_t k = 0; k < row.size(); ++k) dot += row[k] * setup.affinities[k];
        weights.push_back(std::exp(-t * dot));
    }
    auto mv = mean_var(weights);
    double z = normal_quantile(1.0 - params.significance / 2.0);
    report.estimate = mv.mean;
    report.lower = mv.mean - z * mv.std_error();
    report.upper = mv.mean + z * mv.std_error();
    report.passed = report.lower <= 1.0 && 1.0 <= report.upper;
    return report;
}

KlspReport klsp_check(const ChainSpec& chain, const std::vector<Cycle>& cycles, int start, double t,
                      const std::vector<std::vector<double>>& lambda_grid, const FtParams& params) {
    if (lambda_grid.empty()) raise("EmptyGrid", "lambda grid is empty");
    auto setup = split_by_affinity(chain, cycles);
    KlspReport report;
    report.t = t;
    report.skipped = setup.skipped;

    std::size_t r = setup.kept.size();
    auto caps = resolve_caps(params, r);
    std::vector<int> joint_caps;
    for (int c : caps) {
        joint_caps.push_back(c);
        joint_caps.push_back(c);
    }
    auto joint = exact_count_dist(chain, with_conjugates(setup.kept), start, t, joint_caps,
                                  params.poisson_tail_tol);
    report.trunc_mass = joint.trunc_mass();

    auto h = [&](const std::vector<double>& lambda) {
        std::vector<double> expanded;
        expanded.reserve(2 * r);
        for (std::size_t k = 0; k < r; ++k) {
            expanded.push_back(lambda[k]);
            expanded.push_back(-lambda[k]);
        }
        return exact_generating(joint, expanded);
    };

    for (const auto& lambda : lambda_grid) {
        if (lambda.size() != r) raise("BadDimension", "lambda vector has wrong length");
        auto lhs = h(lambda);
        for (std::size_t k = 0; k < r; ++k) {
            std::vector<double> mapped = lambda;
            mapped[k] = -(lambda[k] + setup.affinities[k]);
            auto rhs = h(mapped);
            KlspRow row;
            row.lambda = lambda;
            row.flipped = static_cast<int>(k);
            row.lhs = lhs.value;
            row.rhs = rhs.value;
            row.residual = std::abs(lhs.value - rhs.value);
            row.bound = 10.0 * std::max({lhs.trunc_error, rhs.trunc_error, 1e-15});
            report.max_residual = std::max(report.max_residual, row.residual);
            if (row.residual > row.bound) report.passed = false;
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

std::string TransientFtReport::to_json(const std::string& input_digest) const {
    json j;
    j["test"] = "transient_ft";
    j["version"] = std::string(kLibraryVersion);
    j["input_digest"] = input_digest;
    j["mode"] = "exact";
    j["t"] = t;
    j["affinities"] = affinities;
    j["fitted_affinities"] = fitted_affinities;
    j["skipped_infinite_affinity"] = skipped;
    j["cells_compared"] = cells.size();
    j["max_deviation"] = max_deviation;
    j["trunc_mass"] = trunc_mass;
    j["verdict"] = passed ? "pass" : "reject";
    return j.dump(2);
}

std::string IntegralFtReport::to_json(const std::string& input_digest) const {
    json j;
    j["test"] = "integral_ft";
    j["version"] = std::string(kLibraryVersion);
    j["input_digest"] = input_digest;
    j["mode"] = mode == TestMode::exact ? "exact" : "mc";
    j["t"] = t;
    j["target"] = 1.0;
    j["estimate"] = estimate;
    j["lower"] = lower;
    j["upper"] = upper;
    j["trunc_mass"] = trunc_mass;
    j["skipped_infinite_affinity"] = skipped;
    j["verdict"] = passed ? "pass" : "reject";
    return j.dump(2);
}

std::string KlspReport::to_json(const std::string& input_digest) const {
    json j;
    j["test"] = "klsp";
    j["version"] = std::string(kLibraryVersion);
    j["input_digest"] = input_digest;
    j["mode"] = "exact";
    j["t"] = t;
    j["rows"] = json::array();
    for (const auto& row : rows) {
        json e;
        e["lambda"] = row.lambda;
        e["flipped"] = row.flipped;
        e["lhs"] = row.lhs;
        e["rhs"] = row.rhs;
        e["residual"] = row.residual;
        e["bound"] = row.bound;
        j["rows"].push_back(std::move(e));
    }
    j["max_residual"] = max_residual;
    j["trunc_mass"] = trunc_mass;
    j["skipped_infinite_affinity"] = skipped;
    j["verdict"] = passed ? "pass" : "reject";
    return j.dump(2);
}

} // namespace cyclecirc
