#pragma once

#include <cstddef>
#include <vector>

namespace knudsen {

// Two-sample Kolmogorov-Smirnov distance between empirical CDFs.
double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b);

// Asymptotic two-sample critical value at level alpha.
double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha);

// One-sample KS statistic against a CDF given as sorted (value, cdf) evaluations.
double ks_statistic_vs_cdf(std::vector<double> sample, const std::vector<double>& values,
                           const std::vector<double>& cdf);

// Pearson two-sample chi-square over categories (pooled expectation).
// Returns the statistic; dof = (#categories with pooled counts > 0) - 1.
double chi2_two_sample(const std::vector<double>& counts_a, const std::vector<double>& counts_b,
                       int* dof_out);

// One-sample chi-square against expected counts.
double chi2_one_sample(const std::vector<double>& counts, const std::vector<double>& expected,
                       int* dof_out);

double chi2_quantile(int dof, double p);

struct WlsFit {
  std::vector<double> coeff;  // design-order coefficients
  double rss = 0.0;
  std::vector<double> residual;
  std::vector<double> fitted;
};

// Weighted least squares with an arbitrary design matrix (rows x cols), solved
// by normal equations with Cholesky; small systems only.
WlsFit wls(const std::vector<std::vector<double>>& design, const std::vector<double>& y,
           const std::vector<double>& weight);

}  // namespace knudsen
