#include "goalfv/euler.hpp"

#include <algorithm>

namespace goalfv {

Mat4 mat4_zero() {
  Mat4 m{};
  return m;
}

Mat4 mat4_identity() {
  Mat4 m{};
  for (int i = 0; i < 4; ++i) at(m, i, i) = 1.0;
  return m;
}

Mat4 mat4_transpose(const Mat4& m) {
  Mat4 t{};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) at(t, c, r) = at(m, r, c);
  return t;
}

State4 mat4_apply(const Mat4& m, State4 v) {
  State4 y;
  for (int r = 0; r < 4; ++r) {
    double s = 0.0;
    for (int c = 0; c < 4; ++c) s += at(m, r, c) * v[c];
    y[r] = s;
  }
  return y;
}

State4 mat4_apply_transposed(const Mat4& m, State4 v) {
  State4 y;
  for (int r = 0; r < 4; ++r) {
    double s = 0.0;
    for (int c = 0; c < 4; ++c) s += at(m, c, r) * v[c];
    y[r] = s;
  }
  return y;
}

void mat4_add_scaled(Mat4& dst, const Mat4& src, double s) {
  for (int k = 0; k < 16; ++k) dst[k] += s * src[k];
}

double total_energy(double rho, double p, Vec2 velocity, double gamma) {
  return p / (gamma - 1.0) + 0.5 * rho * dot(velocity, velocity);
}

double pressure(const State4& u, double gamma) {
  if (!(u.rho > 0.0)) {
    throw InadmissibleState("nonpositive density " + std::to_string(u.rho));
  }
  const double p = (gamma - 1.0) * (u.E - 0.5 * (u.mx * u.mx + u.my * u.my) / u.rho);
  if (!(p > 0.0)) {
    throw InadmissibleState("nonpositive pressure " + std::to_string(p));
  }
  return p;
}

bool admissible(const State4& u, double gamma) {
  if (!(u.rho > 0.0) || !std::isfinite(u.rho)) return false;
  const double p = (gamma - 1.0) * (u.E - 0.5 * (u.mx * u.mx + u.my * u.my) / u.rho);
  return p > 0.0 && std::isfinite(p);
}

double sound_speed(const State4& u, double gamma) {
  return std::sqrt(gamma * pressure(u, gamma) / u.rho);
}

FluxTensor physical_flux(const State4& u, double gamma) {
  const double p = pressure(u, gamma);
  const double vx = u.mx / u.rho;
  const double vy = u.my / u.rho;
  FluxTensor f;
  f.fx = {u.mx, u.mx * vx + p, u.my * vx, vx * (u.E + p)};
  f.fy = {u.my, u.mx * vy, u.my * vy + p, vy * (u.E + p)};
  return f;
}

State4 flux_dot_n(const State4& u, Vec2 n, double gamma) {
  const double p = pressure(u, gamma);
  const double vn = (u.mx * n.x + u.my * n.y) / u.rho;
  return {u.rho * vn, u.mx * vn + p * n.x, u.my * vn + p * n.y,
          (u.E + p) * vn};
}

Mat4 flux_dot_n_jacobian(const State4& u, Vec2 n, double gamma) {
  const double g1 = gamma - 1.0;
  const double vx = u.mx / u.rho;
  const double vy = u.my / u.rho;
  const double vn = vx * n.x + vy * n.y;
  const double ke = 0.5 * (vx * vx + vy * vy);
  const double p = pressure(u, gamma);
  const double H = (u.E + p) / u.rho;  // total enthalpy

  Mat4 a{};
  // mass row: flux is linear in momentum
  at(a, 0, 0) = 0.0;
  at(a, 0, 1) = n.x;
  at(a, 0, 2) = n.y;
  at(a, 0, 3) = 0.0;
  // x-momentum
  at(a, 1, 0) = -vx * vn + g1 * ke * n.x;
  at(a, 1, 1) = vn + (2.0 - gamma) * vx * n.x;
  at(a, 1, 2) = vx * n.y - g1 * vy * n.x;
  at(a, 1, 3) = g1 * n.x;
  // y-momentum
  at(a, 2, 0) = -vy * vn + g1 * ke * n.y;
  at(a, 2, 1) = vy * n.x - g1 * vx * n.y;
  at(a, 2, 2) = vn + (2.0 - gamma) * vy * n.y;
  at(a, 2, 3) = g1 * n.y;
  // energy
  at(a, 3, 0) = (g1 * ke - H) * vn;
  at(a, 3, 1) = H * n.x - g1 * vx * vn;
  at(a, 3, 2) = H * n.y - g1 * vy * vn;
  at(a, 3, 3) = gamma * vn;
  return a;
}

namespace {

State4 llf_flux(const State4& uL, const State4& uR, Vec2 n, double gamma) {
  const double vnL = (uL.mx * n.x + uL.my * n.y) / uL.rho;
  const double vnR = (uR.mx * n.x + uR.my * n.y) / uR.rho;
  const double lam =
      std::max(std::abs(vnL) + sound_speed(uL, gamma),
               std::abs(vnR) + sound_speed(uR, gamma));
  const State4 fL = flux_dot_n(uL, n, gamma);
  const State4 fR = flux_dot_n(uR, n, gamma);
  return 0.5 * (fL + fR) - 0.5 * lam * (uR - uL);
}

// d(|vn| + c)/du
State4 max_wave_gradient(const State4& u, Vec2 n, double gamma) {
  const double g1 = gamma - 1.0;
  const double vx = u.mx / u.rho;
  const double vy = u.my / u.rho;
  const double vn = vx * n.x + vy * n.y;
  const double sgn = vn >= 0.0 ? 1.0 : -1.0;
  const double p = pressure(u, gamma);
  const double c = std::sqrt(gamma * p / u.rho);
  const double kc = gamma / (2.0 * c * u.rho);
  State4 g;
  g.rho = sgn * (-vn / u.rho) + kc * (g1 * 0.5 * (vx * vx + vy * vy) - p / u.rho);
  g.mx = sgn * (n.x / u.rho) + kc * (-g1 * vx);
  g.my = sgn * (n.y / u.rho) + kc * (-g1 * vy);
  g.E = kc * g1;
  return g;
}

void llf_jacobians(const State4& uL, const State4& uR, Vec2 n, double gamma,
                   Mat4& dL, Mat4& dR) {
  const double vnL = (uL.mx * n.x + uL.my * n.y) / uL.rho;
  const double vnR = (uR.mx * n.x + uR.my * n.y) / uR.rho;
  const double wL = std::abs(vnL) + sound_speed(uL, gamma);
  const double wR = std::abs(vnR) + sound_speed(uR, gamma);
  const double lam = std::max(wL, wR);

  dL = flux_dot_n_jacobian(uL, n, gamma);
  for (auto& v : dL) v *= 0.5;
  dR = flux_dot_n_jacobian(uR, n, gamma);
  for (auto& v : dR) v *= 0.5;
  for (int i = 0; i < 4; ++i) {
    at(dL, i, i) += 0.5 * lam;
    at(dR, i, i) -= 0.5 * lam;
  }
  // subgradient of the dissipation: differentiate through whichever side
  // attains the max (ties go left)
  const State4 du = uR - uL;
  if (wL >= wR) {
    const State4 g = max_wave_gradient(uL, n, gamma);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) at(dL, i, j) -= 0.5 * du[i] * g[j];
  } else {
    const State4 g = max_wave_gradient(uR, n, gamma);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) at(dR, i, j) -= 0.5 * du[i] * g[j];
  }
}

State4 hllc_flux(const State4& uL, const State4& uR, Vec2 n, double gamma) {
  const double pL = pressure(uL, gamma);
  const double pR = pressure(uR, gamma);
  const double cL = std::sqrt(gamma * pL / uL.rho);
  const double cR = std::sqrt(gamma * pR / uR.rho);
  const double vnL = (uL.mx * n.x + uL.my * n.y) / uL.rho;
  const double vnR = (uR.mx * n.x + uR.my * n.y) / uR.rho;

  // Davis wave-speed bounds: mirror-antisymmetric, and sL <= sR always holds,
  // unlike pressure-based estimates on strongly colliding states
  const double sL = std::min(vnL - cL, vnR - cR);
  const double sR = std::max(vnL + cL, vnR + cR);
  const double denom = uL.rho * (sL - vnL) - uR.rho * (sR - vnR);
  if (std::abs(denom) < 1e-300) return llf_flux(uL, uR, n, gamma);
  const double s_star =
      (pR - pL + uL.rho * vnL * (sL - vnL) - uR.rho * vnR * (sR - vnR)) / denom;

  if (sL >= 0.0) return flux_dot_n(uL, n, gamma);
  if (sR <= 0.0) return flux_dot_n(uR, n, gamma);

  const auto star_state = [&](const State4& u, double p, double vn, double s) {
    const double f = u.rho * (s - vn) / (s - s_star);
    State4 w;
    w.rho = f;
    w.mx = f * (u.mx / u.rho + (s_star - vn) * n.x);
    w.my = f * (u.my / u.rho + (s_star - vn) * n.y);
    w.E = f * (u.E / u.rho + (s_star - vn) * (s_star + p / (u.rho * (s - vn))));
    return w;
  };
  if (s_star >= 0.0) {
    const State4 us = star_state(uL, pL, vnL, sL);
    return flux_dot_n(uL, n, gamma) + sL * (us - uL);
  }
  const State4 us = star_state(uR, pR, vnR, sR);
  return flux_dot_n(uR, n, gamma) + sR * (us - uR);
}

void fd_flux_jacobians(const State4& uL, const State4& uR, Vec2 n, double gamma,
                       FluxScheme scheme, Mat4& dL, Mat4& dR) {
  dL = mat4_zero();
  dR = mat4_zero();
  for (int side = 0; side < 2; ++side) {
    const State4& base = side == 0 ? uL : uR;
    Mat4& out = side == 0 ? dL : dR;
    for (int k = 0; k < 4; ++k) {
      double h = 1e-6 * (1.0 + std::abs(base[k]));
      for (int attempt = 0; attempt < 2; ++attempt) {
        State4 up = base, dn = base;
        up[k] += h;
        dn[k] -= h;
        const State4& pl = side == 0 ? up : uL;
        const State4& pr = side == 0 ? uR : up;
        const State4& ml = side == 0 ? dn : uL;
        const State4& mr = side == 0 ? uR : dn;
        if (!admissible(up, gamma) || !admissible(dn, gamma)) {
          h *= 0.25;  // perturbed state left admissibility; shrink and retry once
          continue;
        }
        const State4 fp = numerical_flux(pl, pr, n, gamma, scheme);
        const State4 fm = numerical_flux(ml, mr, n, gamma, scheme);
        for (int i = 0; i < 4; ++i) at(out, i, k) = (fp[i] - fm[i]) / (2.0 * h);
        break;
      }
    }
  }
}

}  // namespace

State4 numerical_flux(const State4& uL, const State4& uR, Vec2 n, double gamma,
                      FluxScheme scheme) {
  switch (scheme) {
    case FluxScheme::LLF:
      return llf_flux(uL, uR, n, gamma);
    case FluxScheme::HLLC:
      return hllc_flux(uL, uR, n, gamma);
  }
  throw std::logic_error("unknown flux scheme");
}

void flux_jacobians(const State4& uL, const State4& uR, Vec2 n, double gamma,
                    FluxScheme scheme, Mat4& dHduL, Mat4& dHduR) {
  if (scheme == FluxScheme::LLF) {
    llf_jacobians(uL, uR, n, gamma, dHduL, dHduR);
  } else {
    fd_flux_jacobians(uL, uR, n, gamma, scheme, dHduL, dHduR);
  }
}

State4 wall_flux(const State4& u_interior, Vec2 n, double gamma) {
  const double p = pressure(u_interior, gamma);
  return {0.0, p * n.x, p * n.y, 0.0};
}

Mat4 wall_flux_jacobian(const State4& u, Vec2 n, double gamma) {
  const double g1 = gamma - 1.0;
  const double vx = u.mx / u.rho;
  const double vy = u.my / u.rho;
  const State4 dp = {g1 * 0.5 * (vx * vx + vy * vy), -g1 * vx, -g1 * vy, g1};
  Mat4 m{};
  for (int j = 0; j < 4; ++j) {
    at(m, 1, j) = dp[j] * n.x;
    at(m, 2, j) = dp[j] * n.y;
  }
  return m;
}

State4 farfield_flux(const State4& u_interior, const FlowConfig& cfg, Vec2 n,
                     FluxScheme scheme) {
  return numerical_flux(u_interior, freestream_state(cfg), n, cfg.gamma, scheme);
}

State4 freestream_state(const FlowConfig& cfg) {
  const double c_inf = std::sqrt(cfg.gamma * cfg.p_inf / cfg.rho_inf);
  const double alpha = cfg.alpha_deg * M_PI / 180.0;
  const Vec2 v = {cfg.mach * c_inf * std::cos(alpha),
                  cfg.mach * c_inf * std::sin(alpha)};
  State4 u;
  u.rho = cfg.rho_inf;
  u.mx = cfg.rho_inf * v.x;
  u.my = cfg.rho_inf * v.y;
  u.E = total_energy(cfg.rho_inf, cfg.p_inf, v, cfg.gamma);
  return u;
}

State4 mirror_state(const State4& u, Vec2 n) {
  const double mn = u.mx * n.x + u.my * n.y;
  return {u.rho, u.mx - 2.0 * mn * n.x, u.my - 2.0 * mn * n.y, u.E};
}

}  // namespace goalfv
