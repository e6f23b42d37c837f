#include "goalfv/naca.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace goalfv {

NacaCurve::NacaCurve(const std::string& code) : code_(code) {
  if (code.size() != 4 ||
      !std::all_of(code.begin(), code.end(),
                   [](unsigned char c) { return std::isdigit(c); })) {
    throw std::invalid_argument("NACA code must be 4 digits, got '" + code + "'");
  }
  max_camber_ = (code[0] - '0') / 100.0;
  camber_pos_ = (code[1] - '0') / 10.0;
  thickness_ratio_ = ((code[2] - '0') * 10 + (code[3] - '0')) / 100.0;
}

double NacaCurve::thickness(double x) const {
  const double t = thickness_ratio_;
  const double sx = std::sqrt(std::max(x, 0.0));
  return 5.0 * t *
         (0.2969 * sx - 0.1260 * x - 0.3516 * x * x + 0.2843 * x * x * x -
          0.1015 * x * x * x * x);
}

double NacaCurve::camber(double x) const {
  const double m = max_camber_;
  const double p = camber_pos_;
  if (m == 0.0 || p == 0.0) return 0.0;
  if (x < p) return m / (p * p) * (2.0 * p * x - x * x);
  return m / ((1.0 - p) * (1.0 - p)) * ((1.0 - 2.0 * p) + 2.0 * p * x - x * x);
}

Vec2 NacaCurve::point(double s) const {
  if (s == 0.0) return {1.0, 0.0};  // closed trailing edge
  const bool lower = s > 1.0;
  const double q = lower ? 2.0 - s : s;
  const double x = 0.5 * (1.0 + std::cos(M_PI * q));
  const double yt = thickness(x);
  if (max_camber_ == 0.0) {
    // exact mirror for symmetric profiles
    return {x, lower ? -yt : yt};
  }
  const double yc = camber(x);
  return {x, lower ? yc - yt : yc + yt};
}

double NacaCurve::distance(Vec2 p) const {
  const int n = 512;
  double best = 1e300;
  double best_s = 0.0;
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k / n;
    const double d = norm(point(s) - p);
    if (d < best) {
      best = d;
      best_s = s;
    }
  }
  double lo = best_s - 2.0 / n, hi = best_s + 2.0 / n;
  for (int it = 0; it < 80; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    const auto wrap = [](double s) { return s < 0 ? s + 2 : (s >= 2 ? s - 2 : s); };
    if (norm(point(wrap(m1)) - p) < norm(point(wrap(m2)) - p))
      hi = m2;
    else
      lo = m1;
  }
  const double s = 0.5 * (lo + hi);
  const double sw = s < 0 ? s + 2 : (s >= 2 ? s - 2 : s);
  return std::min(best, norm(point(sw) - p));
}

double curve_param_midpoint(double s1, double s2) {
  double a = s1, b = s2;
  if (b - a > 1.0) b -= 2.0;
  if (a - b > 1.0) a -= 2.0;
  double mid = 0.5 * (a + b);
  if (mid < 0.0) mid += 2.0;
  if (mid >= 2.0) mid -= 2.0;
  return mid;
}

}  // namespace goalfv
