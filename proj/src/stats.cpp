#include "knudsen/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace knudsen {

double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) ++i; else ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha) {
  double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

double ks_statistic_vs_cdf(std::vector<double> sample, const std::vector<double>& values,
                           const std::vector<double>& cdf) {
  std::sort(sample.begin(), sample.end());
  double d = 0.0;
  const double n = static_cast<double>(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    // linear interpolation of the reference CDF
    double x = sample[i];
    auto it = std::lower_bound(values.begin(), values.end(), x);
    double F;
    if (it == values.begin()) F = cdf.front();
    else if (it == values.end()) F = cdf.back();
    else {
      std::size_t k = static_cast<std::size_t>(it - values.begin());
      double t = (x - values[k - 1]) / (values[k] - values[k - 1]);
      F = cdf[k - 1] + t * (cdf[k] - cdf[k - 1]);
    }
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - F));
    d = std::max(d, std::abs(static_cast<double>(i) / n - F));
  }
  return d;
}

double chi2_two_sample(const std::vector<double>& counts_a, const std::vector<double>& counts_b,
                       int* dof_out) {
  if (counts_a.size() != counts_b.size())
    throw std::invalid_argument("chi2_two_sample: category mismatch");
  double na = 0.0, nb = 0.0;
  for (double c : counts_a) na += c;
  for (double c : counts_b) nb += c;
  double stat = 0.0;
  int used = 0;
  for (std::size_t k = 0; k < counts_a.size(); ++k) {
    double pooled = counts_a[k] + counts_b[k];
    if (pooled <= 0.0) continue;
    double ea = pooled * na / (na + nb);
    double eb = pooled * nb / (na + nb);
    stat += (counts_a[k] - ea) * (counts_a[k] - ea) / ea +
            (counts_b[k] - eb) * (counts_b[k] - eb) / eb;
    ++used;
  }
  if (dof_out) *dof_out = used - 1;
  return stat;
}

double chi2_one_sample(const std::vector<double>& counts, const std::vector<double>& expected,
                       int* dof_out) {
  if (counts.size() != expected.size())
    throw std::invalid_argument("chi2_one_sample: category mismatch");
  double stat = 0.0;
  int used = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (expected[k] <= 0.0) continue;
    double d = counts[k] - expected[k];
    stat += d * d / expected[k];
    ++used;
  }
  if (dof_out) *dof_out = used - 1;
  return stat;
}

double chi2_quantile(int dof, double p) {
  boost::math::chi_squared dist(dof);
  return boost::math::quantile(dist, p);
}

WlsFit wls(const std::vector<std::vector<double>>& design, const std::vector<double>& y,
           const std::vector<double>& weight) {
  const std::size_t n = design.size();
  if (n == 0 || y.size() != n || weight.size() != n)
    throw std::invalid_argument("wls: inconsistent sizes");
  const std::size_t p = design[0].size();
  // normal equations A = X' W X, rhs = X' W y
  std::vector<std::vector<double>> A(p, std::vector<double>(p, 0.0));
  std::vector<double> rhs(p, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < p; ++i) {
      rhs[i] += weight[r] * design[r][i] * y[r];
      for (std::size_t j = 0; j < p; ++j) A[i][j] += weight[r] * design[r][i] * design[r][j];
    }
  }
  // Cholesky A = L L'
  std::vector<std::vector<double>> L(p, std::vector<double>(p, 0.0));
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = A[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
      if (i == j) {
        if (s <= 0.0) throw std::runtime_error("wls: singular design");
        L[i][i] = std::sqrt(s);
      } else {
        L[i][j] = s / L[j][j];
      }
    }
  }
  std::vector<double> z(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    double s = rhs[i];
    for (std::size_t k = 0; k < i; ++k) s -= L[i][k] * z[k];
    z[i] = s / L[i][i];
  }
  WlsFit fit;
  fit.coeff.assign(p, 0.0);
  for (std::size_t ii = p; ii-- > 0;) {
    double s = z[ii];
    for (std::size_t k = ii + 1; k < p; ++k) s -= L[k][ii] * fit.coeff[k];
    fit.coeff[ii] = s / L[ii][ii];
  }
  fit.fitted.resize(n);
  fit.residual.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    double f = 0.0;
    for (std::size_t i = 0; i < p; ++i) f += design[r][i] * fit.coeff[i];
    fit.fitted[r] = f;
    fit.residual[r] = y[r] - f;
    fit.rss += weight[r] * fit.residual[r] * fit.residual[r];
  }
  return fit;
}

}  // namespace knudsen
