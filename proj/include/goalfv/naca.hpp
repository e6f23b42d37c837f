// Analytic NACA 4-digit boundary curve used for wall-node projection.
#pragma once

#include <optional>
#include <string>

#include "goalfv/euler.hpp"

namespace goalfv {

/// Closed curve around a NACA 4-digit profile, chord 1, leading edge at the
/// origin. Parameterized by s in [0,2): s in [0,1] walks the upper surface
/// from the trailing edge to the leading edge with x = (1+cos(pi*s))/2;
/// s in (1,2) mirrors the lower surface. The trailing edge is closed by
/// pinning s=0 to (1,0). Cambered profiles use the thin-airfoil vertical
/// offset y = y_c +/- y_t.
class NacaCurve {
 public:
  explicit NacaCurve(const std::string& four_digit_code);

  Vec2 point(double s) const;
  /// Thickness half-height y_t(x) for x in [0,1].
  double thickness(double x) const;
  double camber(double x) const;
  const std::string& code() const { return code_; }

  /// Distance from p to the curve (sampled globally, then refined locally
  /// by ternary search). Used by tests.
  double distance(Vec2 p) const;

 private:
  std::string code_;
  double max_camber_ = 0.0;     // m, fraction of chord
  double camber_pos_ = 0.0;     // p, fraction of chord
  double thickness_ratio_ = 0;  // t, fraction of chord
};

/// Midpoint of two curve parameters, accounting for the s=0/s=2 wrap.
double curve_param_midpoint(double s1, double s2);

}  // namespace goalfv
