#include "cyclecirc/scgf.hpp"

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

double median(std::vector<double> xs) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(xs.begin(), xs.end());
    std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

} // namespace

ScgfEstimate scgf_estimate(const std::vector<std::vector<double>>& observations, double t,
                           const std::vector<std::vector<double>>& lambda_grid) {
    if (observations.empty()) raise("EmptySample", "no observations");
    if (lambda_grid.empty()) raise("EmptyGrid", "lambda grid is empty");
    std::size_t dim = observations.front().size();
    ScgfEstimate est;
    est.t = t;
    est.lambda_grid = lambda_grid;
    double n = static_cast<double>(observations.size());

    for (std::size_t g = 0; g < lambda_grid.size(); ++g) {
        const auto& lambda = lambda_grid[g];
        if (lambda.size() != dim) raise("BadDimension", "lambda vector has wrong length");
        bool zero = std::all_of(lambda.begin(), lambda.end(), [](double v) { return v == 0.0; });
        if (zero) {
            // log of a mean of exact ones
            est.value.push_back(0.0);
            est.std_error.push_back(0.0);
            est.ess.push_back(n);
            continue;
        }
        // log-sum-exp over v_i = t * lambda . x_i
        double vmax = -std::numeric_limits<double>::infinity();
        std::vector<double> v(observations.size());
        for (std::size_t i = 0; i < observations.size(); ++i) {
            double dot = 0.0;
            for (std::size_t k = 0; k < dim; ++k) dot += lambda[k] * observations[i][k];
            v[i] = t * dot;
            vmax = std::max(vmax, v[i]);
        }
        KahanSum sum, sum_sq;
        for (double& vi : v) {
            double w = std::exp(vi - vmax);
            sum.add(w);
            sum_sq.add(w * w);
        }
        double mean_w = sum.value() / n;
        double ess = sum.value() * sum.value() / std::max(sum_sq.value(), 1e-300);
        double var_w = std::max(0.0, sum_sq.value() / n - mean_w * mean_w) * n / std::max(n - 1.0, 1.0);
        est.value.push_back((vmax + std::log(mean_w)) / t);
        // delta method for (1/t) log(mean): se = sd(w) / (mean(w) sqrt(n) t)
        est.std_error.push_back(std::sqrt(var_w / n) / (mean_w * t));
        est.ess.push_back(ess);
        if (ess < 10.0) est.degenerate.push_back(static_cast<int>(g)); // DegenerateTail
    }
    return est;
}

std::vector<double> legendre_fenchel_1d(std::span<const double> lambda, std::span<const double> f,
                                        std::span<const double> x) {
    if (lambda.empty() || lambda.size() != f.size()) raise("EmptyGrid", "bad lambda grid");
    if (x.empty()) raise("EmptyGrid", "empty x grid");
    std::vector<double> out;
    out.reserve(x.size());
    for (double xv : x) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t g = 0; g < lambda.size(); ++g) best = std::max(best, lambda[g] * xv - f[g]);
        out.push_back(best);
    }
    return out;
}

RateFunctionEstimate legendre_fenchel(const ScgfEstimate& f,
                                      const std::vector<std::vector<double>>& x_grid) {
    if (x_grid.empty()) raise("EmptyGrid", "empty x grid");
    RateFunctionEstimate est;
    est.x_grid = x_grid;
    for (const auto& x : x_grid) {
        double best = -std::numeric_limits<double>::infinity();
        int arg = 0;
        for (std::size_t g = 0; g < f.lambda_grid.size(); ++g) {
            const auto& lambda = f.lambda_grid[g];
            if (lambda.size() != x.size()) raise("BadDimension", "x vector has wrong length");
            double dot = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k) dot += lambda[k] * x[k];
            double v = dot - f.value[g];
            if (v > best) {
                best = v;
                arg = static_cast<int>(g);
            }
        }
        est.value.push_back(best);
        est.argmax.push_back(arg);
        est.std_error.push_back(f.std_error[static_cast<std::size_t>(arg)]);
    }
    if (x_grid.front().size() == 1) {
        std::vector<double> xs;
        for (const auto& x : x_grid) xs.push_back(x[0]);
        est.convex_ok = convex_on_grid(xs, est.value);
    }
    return est;
}

bool convex_on_grid(std::span<const double> x, std::span<const double> f, double tol) {
    if (x.size() != f.size() || x.size() < 3) return true;
    double prev_slope = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < x.size(); ++i) {
        double dx = x[i] - x[i - 1];
        if (dx <= 0.0) raise("EmptyGrid", "x grid must be strictly increasing");
        double slope = (f[i] - f[i - 1]) / dx;
        if (slope < prev_slope - tol) return false;
        prev_slope = slope;
    }
    return true;
}

namespace {

// I at a single point from a 1-d SCGF estimate, plus the argmax std error.
std::pair<double, double> lf_at(const ScgfEstimate& f, double x) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t g = 0; g < f.lambda_grid.size(); ++g) {
        double v = f.lambda_grid[g][0] * x - f.value[g];
        if (v > best) {
            best = v;
            arg = g;
        }
    }
    return {best, f.std_error[arg]};
}

} // namespace

RateSymmetryReport rate_symmetry_check(const ChainSpec& chain, const Cycle& cycle, int start,
                                       double t, std::span<const double> lambda_grid,
                                       std::span<const double> x_grid,
                                       const RateSymmetryParams& params) {
    if (lambda_grid.empty() || x_grid.empty()) raise("EmptyGrid", "grids must be nonempty");
    RateSymmetryReport report;
    report.t = t;
    report.replicas = params.replicas;
    report.affinity = cycle_affinity(chain, cycle);
    if (!std::isfinite(report.affinity))
        raise("InfiniteAffinity", "net-circulation symmetry needs a finite affinity");

    BatchOptions opt;
    opt.replicas = params.replicas;
    opt.seed = params.seed;
    opt.workers = params.workers;
    auto batch = batch_sample(chain, start, t, {cycle}, opt);
    std::vector<std::vector<double>> obs;
    obs.reserve(batch.samples.size());
    for (const auto& s : batch.samples) obs.push_back({s.net_circulation(0)});

    std::vector<std::vector<double>> grid;
    for (double l : lambda_grid) grid.push_back({l});
    auto f = scgf_estimate(obs, t, grid);
    report.degenerate = f.degenerate;

    std::vector<double> residuals, bars;
    for (double x : x_grid) {
        auto [i_x, se_x] = lf_at(f, x);
        auto [i_mx, se_mx] = lf_at(f, -x);
        RateSymmetryPoint p;
        p.x = x;
        p.i_value = i_x;
        p.i_mirror = i_mx - report.affinity * x;
        p.residual = i_x - p.i_mirror;
        p.error_bar = se_x + se_mx;
        residuals.push_back(std::abs(p.residual));
        bars.push_back(p.error_bar);
        report.points.push_back(p);
    }
    report.median_abs_residual = median(residuals);
    report.median_error_bar = median(bars);
    report.passed = report.median_abs_residual <= params.error_bar_factor * report.median_error_bar;
    return report;
}

PairSymmetryReport rate_symmetry_check_pair(const ChainSpec& chain, const Cycle& a, const Cycle& b,
                                            int start, double t,
                                            std::span<const double> lambda_grid,
                                            std::span<const double> x_grid,
                                            const RateSymmetryParams& params) {
    if (!is_similar(a, b)) raise("NotSimilar", "pair symmetry needs similar cycles");
    double ga = cycle_strength(chain, a);
    double gb = cycle_strength(chain, b);
    if (ga <= 0.0 || gb <= 0.0) raise("ZeroForwardStrength", "both cycles need positive strength");

    PairSymmetryReport report;
    report.t = t;
    report.log_strength_ratio = std::log(ga / gb);

    BatchOptions opt;
    opt.replicas = params.replicas;
    opt.seed = params.seed;
    opt.workers = params.workers;
    auto batch = batch_sample(chain, start, t, {a, b}, opt);
    std::vector<std::vector<double>> obs;
    obs.reserve(batch.samples.size());
    for (const auto& s : batch.samples) obs.push_back({s.circulation(0), s.circulation(1)});

    std::vector<std::vector<double>> grid;
    for (double l1 : lambda_grid)
        for (double l2 : lambda_grid) grid.push_back({l1, l2});
    auto f = scgf_estimate(obs, t, grid);

    auto lf2 = [&](double x1, double x2) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t g = 0; g < f.lambda_grid.size(); ++g) {
            double v = f.lambda_grid[g][0] * x1 + f.lambda_grid[g][1] * x2 - f.value[g];
            if (v > best) {
                best = v;
                arg = g;
            }
        }
        return std::pair<double, double>{best, f.std_error[arg]};
    };

    std::vector<double> residuals, bars;
    for (double x1 : x_grid)
        for (double x2 : x_grid) {
            auto [i_ab, se_ab] = lf2(x1, x2);
            auto [i_ba, se_ba] = lf2(x2, x1);
            RateSymmetryPoint p;
            p.x = x1 - x2;
            p.i_value = i_ab;
            p.i_mirror = i_ba - report.log_strength_ratio * (x1 - x2);
            p.residual = i_ab - p.i_mirror;
            p.error_bar = se_ab + se_ba;
            residuals.push_back(std::abs(p.residual));
            bars.push_back(p.error_bar);
            report.points.push_back(p);
        }
    report.median_abs_residual = median(residuals);
    report.median_error_bar = median(bars);
    report.passed = report.median_abs_residual <= params.error_bar_factor * report.median_error_bar;
    return report;
}

std::string RateSymmetryReport::to_json(const std::string& input_digest) const {
    json j;
    j["test"] = "rate_symmetry";
    j["version"] = std::string(kLibraryVersion);
    j["input_digest"] = input_digest;
    j["criterion"] = "statistical"; // asymptotic identity checked within error bars
    j["t"] = t;
    j["replicas"] = replicas;
    j["affinity"] = affinity;
    j["points"] = json::array();
    for (const auto& p : points) {
        json e;
        e["x"] = p.x;
        e["I"] = p.i_value;
        e["mirror"] = p.i_mirror;
        e["residual"] = p.residual;
        e["error_bar"] = p.error_bar;
        j["points"].push_back(std::move(e));
    }
    j["median_abs_residual"] = median_abs_residual;
    j["median_error_bar"] = median_error_bar;
    j["degenerate_lambda_indices"] = degenerate;
    j["verdict"] = passed ? "pass" : "reject";
    return j.dump(2);
}

} // namespace cyclecirc
