// Conservative-variable algebra, physical and numerical fluxes, flux
// Jacobians, and boundary flux treatments for 2D steady Euler.
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace goalfv {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

/// Conservative variables (rho, rho*ux, rho*uy, E) on one element.
struct State4 {
  double rho = 0.0;
  double mx = 0.0;
  double my = 0.0;
  double E = 0.0;

  double& operator[](int k) { return (&rho)[k]; }
  double operator[](int k) const { return (&rho)[k]; }
};

inline State4 operator+(State4 a, State4 b) {
  return {a.rho + b.rho, a.mx + b.mx, a.my + b.my, a.E + b.E};
}
inline State4 operator-(State4 a, State4 b) {
  return {a.rho - b.rho, a.mx - b.mx, a.my - b.my, a.E - b.E};
}
inline State4 operator*(double s, State4 a) {
  return {s * a.rho, s * a.mx, s * a.my, s * a.E};
}
inline State4& operator+=(State4& a, State4 b) {
  a.rho += b.rho; a.mx += b.mx; a.my += b.my; a.E += b.E;
  return a;
}
inline State4& operator-=(State4& a, State4 b) {
  a.rho -= b.rho; a.mx -= b.mx; a.my -= b.my; a.E -= b.E;
  return a;
}
inline double dot(State4 a, State4 b) {
  return a.rho * b.rho + a.mx * b.mx + a.my * b.my + a.E * b.E;
}

/// Free-stream and gas configuration. Nondimensionalized so that
/// rho_inf = 1 and p_inf = 1/gamma, hence c_inf = 1 and |v_inf| = mach.
struct FlowConfig {
  double mach = 0.8;
  double alpha_deg = 0.0;
  double gamma = 1.4;
  double rho_inf = 1.0;
  double p_inf = 1.0 / 1.4;
};

enum class FluxScheme { LLF, HLLC };

struct InadmissibleState : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// 4x4 dense block, row-major.
using Mat4 = std::array<double, 16>;

inline double& at(Mat4& m, int r, int c) { return m[4 * r + c]; }
inline double at(const Mat4& m, int r, int c) { return m[4 * r + c]; }

Mat4 mat4_zero();
Mat4 mat4_identity();
Mat4 mat4_transpose(const Mat4& m);
State4 mat4_apply(const Mat4& m, State4 v);
/// y = m^T v
State4 mat4_apply_transposed(const Mat4& m, State4 v);
void mat4_add_scaled(Mat4& dst, const Mat4& src, double s);

/// E = p/(gamma-1) + 0.5*rho*|v|^2
double total_energy(double rho, double p, Vec2 velocity, double gamma);

/// p = (gamma-1)*(E - 0.5*(mx^2+my^2)/rho). Throws InadmissibleState for
/// nonpositive pressure or density.
double pressure(const State4& u, double gamma);

/// True iff rho > 0 and pressure > 0.
bool admissible(const State4& u, double gamma);

double sound_speed(const State4& u, double gamma);

/// Columns of F(u): x-flux and y-flux.
struct FluxTensor {
  State4 fx;
  State4 fy;
};

FluxTensor physical_flux(const State4& u, double gamma);

/// F(u) . n for a (not necessarily unit) direction n.
State4 flux_dot_n(const State4& u, Vec2 n, double gamma);

/// Exact Jacobian d(F.n)/du.
Mat4 flux_dot_n_jacobian(const State4& u, Vec2 n, double gamma);

/// Numerical flux H(uL, uR, n). Consistent (H(u,u,n) = F(u).n) and
/// conservative (H(uL,uR,n) = -H(uR,uL,-n)) for both schemes.
State4 numerical_flux(const State4& uL, const State4& uR, Vec2 n, double gamma,
                      FluxScheme scheme);

/// dH/duL and dH/duR. Analytic for LLF, central finite differences with
/// step 1e-6*(1+|u_k|) for HLLC.
void flux_jacobians(const State4& uL, const State4& uR, Vec2 n, double gamma,
                    FluxScheme scheme, Mat4& dHduL, Mat4& dHduR);

/// Slip-wall flux (0, p*nx, p*ny, 0) from the interior trace pressure.
State4 wall_flux(const State4& u_interior, Vec2 n, double gamma);

/// d(wall_flux)/d(u_interior).
Mat4 wall_flux_jacobian(const State4& u_interior, Vec2 n, double gamma);

/// Ghost-state far field: numerical_flux(u_interior, freestream, n).
State4 farfield_flux(const State4& u_interior, const FlowConfig& cfg, Vec2 n,
                     FluxScheme scheme = FluxScheme::HLLC);

State4 freestream_state(const FlowConfig& cfg);

/// Reflect the normal velocity component: v' = v - 2(v.n)n.
State4 mirror_state(const State4& u, Vec2 n);

}  // namespace goalfv
