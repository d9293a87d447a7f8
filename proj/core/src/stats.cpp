#include "cyclecirc/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "cyclecirc/error.hpp"

namespace cyclecirc {

double MeanVar::std_error() const { return n > 1 ? std::sqrt(variance / static_cast<double>(n)) : 0.0; }

MeanVar mean_var(std::span<const double> xs) {
    MeanVar mv;
    mv.n = static_cast<long long>(xs.size());
    if (mv.n == 0) return mv;
    KahanSum sum;
    for (double x : xs) sum.add(x);
    mv.mean = sum.value() / static_cast<double>(mv.n);
    if (mv.n > 1) {
        KahanSum sq;
        for (double x : xs) sq.add((x - mv.mean) * (x - mv.mean));
        mv.variance = sq.value() / static_cast<double>(mv.n - 1);
    }
    return mv;
}

double kolmogorov_sf(double x) {
    if (x <= 0.0) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        double term = sign * std::exp(-2.0 * k * k * x * x);
        sum += term;
        if (std::abs(term) < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) raise("EmptySample", "KS test needs nonempty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double n1 = static_cast<double>(a.size());
    double n2 = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
    }
    double ne = std::sqrt(n1 * n2 / (n1 + n2));
    double lambda = (ne + 0.12 + 0.11 / ne) * d;
    return {d, kolmogorov_sf(lambda), static_cast<long long>(a.size()), static_cast<long long>(b.size())};
}

ChiSquareResult chi_square_independence(const std::vector<std::vector<long long>>& table) {
    std::size_t rows = table.size();
    std::size_t cols = rows ? table[0].size() : 0;
    std::vector<double> row_tot(rows, 0.0), col_tot(cols, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            double v = static_cast<double>(table[i][j]);
            row_tot[i] += v;
            col_tot[j] += v;
            total += v;
        }
    if (total <= 0.0) raise("EmptySample", "chi-square table has no counts");
    long long live_rows = static_cast<long long>(std::count_if(row_tot.begin(), row_tot.end(),
                                                               [](double v) { return v > 0.0; }));
    long long live_cols = static_cast<long long>(std::count_if(col_tot.begin(), col_tot.end(),
                                                               [](double v) { return v > 0.0; }));
    ChiSquareResult r;
    r.dof = std::max<long long>(0, (live_rows - 1) * (live_cols - 1));
    if (r.dof == 0) return r;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            double expect = row_tot[i] * col_tot[j] / total;
            if (expect <= 0.0) continue;
            double diff = static_cast<double>(table[i][j]) - expect;
            r.statistic += diff * diff / expect;
        }
    r.p_value = chi_square_sf(r.statistic, static_cast<double>(r.dof));
    return r;
}

double chi_square_sf(double x, double dof) {
    if (x <= 0.0) return 1.0;
    boost::math::chi_squared dist(dof);
    return boost::math::cdf(boost::math::complement(dist, x));
}

double normal_quantile(double p) {
    boost::math::normal dist;
    return boost::math::quantile(dist, p);
}

double fit_slope_through_origin(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.empty()) raise("EmptySample", "slope fit needs matched samples");
    KahanSum xy, xx;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xy.add(x[i] * y[i]);
        xx.add(x[i] * x[i]);
    }
    if (xx.value() == 0.0) raise("EmptySample", "slope fit needs nonzero abscissae");
    return xy.value() / xx.value();
}

} // namespace cyclecirc
