// Maximum-likelihood Weibull and gamma fits of the indicator distribution
// with Kolmogorov-Smirnov statistics. Advisory output only; nothing in the
// adaptation loop branches on it.
#pragma once

#include <string>
#include <vector>

namespace goalfv {

struct FitReport {
  bool available = false;
  std::string note;
  int n_used = 0;
  double weibull_shape = 0.0;
  double weibull_scale = 0.0;
  double gamma_shape = 0.0;
  double gamma_scale = 0.0;
  double ks_stat_weibull = 1.0;
  double ks_stat_gamma = 1.0;
  // asymptotic Kolmogorov p-values; reported alongside the statistics since
  // near-1 "KS" figures in the literature usually mean the p-value
  double ks_pvalue_weibull = 0.0;
  double ks_pvalue_gamma = 0.0;
};

/// Fits the nonzero entries; needs at least 20 of them and a non-degenerate
/// spread, otherwise the report comes back unavailable with a note.
FitReport distribution_diagnostic(const std::vector<double>& samples);

double digamma(double x);
/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
double weibull_cdf(double x, double shape, double scale);
double gamma_cdf(double x, double shape, double scale);

}  // namespace goalfv
