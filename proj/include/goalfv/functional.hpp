// Lift/drag boundary functional and its exact linearization. The boundary
// pressure comes from the same edge-trace path the residual uses, which is
// what makes the discrete functional dual-consistent with the residual.
#pragma once

#include "goalfv/primal.hpp"

namespace goalfv {

enum class FunctionalKind { Lift, Drag };

struct FunctionalSpec {
  FunctionalKind kind = FunctionalKind::Drag;
  double alpha_deg = 0.0;
  double c_norm = 1.0;  // C_inf force normalization
};

/// C_inf = 1/2 rho_inf |v_inf|^2 * chord (chord = 1).
FunctionalSpec make_functional(FunctionalKind kind, const FlowConfig& cfg);

/// drag -> (cos a, sin a)/C_inf;  lift -> (-sin a, cos a)/C_inf.
Vec2 beta_vector(const FunctionalSpec& spec);

/// J(u) = sum over wall edges of p(trace) * (n . beta) * length.
double evaluate_functional(const std::vector<State4>& u, const MeshHierarchy& mesh,
                           const PatchCache& cache, const FlowConfig& cfg,
                           const FunctionalSpec& spec, const ResidualOptions& opts);

/// Exact dJ/du per cell average, with the limiter factors held fixed at the
/// evaluation state (same convention as the defect-correction Jacobian).
/// Nonzero only on elements whose reconstruction stencil touches a wall edge.
std::vector<State4> linearize_functional(const std::vector<State4>& u,
                                         const MeshHierarchy& mesh,
                                         const PatchCache& cache, const FlowConfig& cfg,
                                         const FunctionalSpec& spec,
                                         const ResidualOptions& opts);

}  // namespace goalfv
