#include "goalfv/dist_fit.hpp"

#include <algorithm>
#include <cmath>

namespace goalfv {

double digamma(double x) {
  double r = 0.0;
  while (x < 6.0) {
    r -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  return r + std::log(x) - 0.5 * inv -
         inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 / 252));
}

double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    // series representation
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  // continued fraction for Q, modified Lentz
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  const double q = std::exp(-x + a * std::log(x) - lg) * h;
  return 1.0 - q;
}

double weibull_cdf(double x, double shape, double scale) {
  if (x <= 0.0) return 0.0;
  return 1.0 - std::exp(-std::pow(x / scale, shape));
}

double gamma_cdf(double x, double shape, double scale) {
  if (x <= 0.0) return 0.0;
  return gamma_p(shape, x / scale);
}

namespace {

double ks_statistic(std::vector<double> sorted, double (*cdf)(double, double, double),
                    double p1, double p2) {
  const int n = static_cast<int>(sorted.size());
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = cdf(sorted[i], p1, p2);
    d = std::max(d, std::abs(f - double(i) / n));
    d = std::max(d, std::abs(double(i + 1) / n - f));
  }
  return d;
}

double ks_pvalue(double d, int n) {
  const double sn = std::sqrt(double(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = 2.0 * ((j % 2 == 1) ? 1.0 : -1.0) *
                        std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace

FitReport distribution_diagnostic(const std::vector<double>& samples) {
  FitReport rep;
  std::vector<double> x;
  x.reserve(samples.size());
  for (double v : samples)
    if (v > 0.0 && std::isfinite(v)) x.push_back(v);
  rep.n_used = static_cast<int>(x.size());
  if (rep.n_used < 20) {
    rep.note = "insufficient data: need at least 20 nonzero indicators, have " +
               std::to_string(rep.n_used);
    return rep;
  }
  std::sort(x.begin(), x.end());
  if (x.back() - x.front() <= 1e-14 * std::abs(x.back())) {
    rep.note = "degenerate sample: zero variance";
    return rep;
  }

  const int n = rep.n_used;
  double mean = 0.0, mean_log = 0.0;
  for (double v : x) {
    mean += v;
    mean_log += std::log(v);
  }
  mean /= n;
  mean_log /= n;

  // Weibull shape by Newton on the profile-likelihood equation
  {
    double k = 1.0;
    for (int it = 0; it < 200; ++it) {
      double swk = 0.0, swkl = 0.0, swkl2 = 0.0;
      for (double v : x) {
        const double w = std::pow(v, k);
        const double l = std::log(v);
        swk += w;
        swkl += w * l;
        swkl2 += w * l * l;
      }
      const double f = swkl / swk - 1.0 / k - mean_log;
      const double fp = (swkl2 * swk - swkl * swkl) / (swk * swk) + 1.0 / (k * k);
      double step = f / fp;
      if (!std::isfinite(step)) break;
      step = std::clamp(step, -0.5 * k, 0.5 * k);
      k -= step;
      if (std::abs(step) < 1e-12 * k) break;
    }
    rep.weibull_shape = k;
    double swk = 0.0;
    for (double v : x) swk += std::pow(v, k);
    rep.weibull_scale = std::pow(swk / n, 1.0 / k);
  }

  // gamma shape by bisection on ln(k) - digamma(k) = s
  {
    const double s = std::log(mean) - mean_log;
    double lo = 1e-6, hi = 1e6;
    for (int it = 0; it < 200; ++it) {
      const double mid = std::sqrt(lo * hi);
      if (std::log(mid) - digamma(mid) > s)
        lo = mid;
      else
        hi = mid;
    }
    rep.gamma_shape = std::sqrt(lo * hi);
    rep.gamma_scale = mean / rep.gamma_shape;
  }

  rep.ks_stat_weibull = ks_statistic(x, weibull_cdf, rep.weibull_shape, rep.weibull_scale);
  rep.ks_stat_gamma = ks_statistic(x, gamma_cdf, rep.gamma_shape, rep.gamma_scale);
  rep.ks_pvalue_weibull = ks_pvalue(rep.ks_stat_weibull, n);
  rep.ks_pvalue_gamma = ks_pvalue(rep.ks_stat_gamma, n);
  rep.available = true;
  return rep;
}

}  // namespace goalfv
