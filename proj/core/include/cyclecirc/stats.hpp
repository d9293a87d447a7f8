#pragma once

#include <span>
#include <vector>

namespace cyclecirc {

// Compensated accumulation for long convolutions and lattice sums.
class KahanSum {
public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

struct MeanVar {
    long long n = 0;
    double mean = 0.0;
    double variance = 0.0; // unbiased
    double std_error() const;
};

MeanVar mean_var(std::span<const double> xs);

// Asymptotic survival function of the Kolmogorov statistic,
// Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorov_sf(double x);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
    long long n1 = 0, n2 = 0;
};

// Two-sample Kolmogorov-Smirnov test with the finite-sample corrected
// asymptotic p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct ChiSquareResult {
    double statistic = 0.0;
    double p_value = 1.0;
    long long dof = 0;
};

// Pearson chi-square test of independence on a contingency table (rows x
// cols of counts). Rows/columns with zero total are dropped.
ChiSquareResult chi_square_independence(const std::vector<std::vector<long long>>& table);

double chi_square_sf(double x, double dof);
double normal_quantile(double p);

// Ordinary least squares y ~ slope * x (through the origin).
double fit_slope_through_origin(std::span<const double> x, std::span<const double> y);

} // namespace cyclecirc
