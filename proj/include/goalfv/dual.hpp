// Exact discrete adjoint: transposed, regularized linear system with the
// functional linearization as right-hand side.
#pragma once

#include "goalfv/functional.hpp"

namespace goalfv {

struct DualField {
  std::vector<State4> z;
};

struct DualOptions {
  double tol_rel = 1e-8;
  LinearMethod method = LinearMethod::GMRES;
  int max_iterations = 20000;
  int restart = 60;
  double alpha_reg = 2.0;  // multiplies |R(u)|_1 for the diagonal shift
  ResidualOptions residual;
};

/// Transpose of the primal Jacobian at u with the same alpha*|R(u)|_1
/// diagonal shift; rhs = dJ/du.
BlockSystem assemble_dual_system(const std::vector<State4>& u, const MeshHierarchy& mesh,
                                 const PatchCache& cache, const FlowConfig& cfg,
                                 const FunctionalSpec& spec, double alpha_reg,
                                 const ResidualOptions& opts);

/// Solves the transposed system to opts.tol_rel. No Newton loop: the dual
/// problem is linear.
DualField solve_dual(const std::vector<State4>& u, const MeshHierarchy& mesh,
                     const PatchCache& cache, const FlowConfig& cfg,
                     const FunctionalSpec& spec, const DualOptions& opts = {});

}  // namespace goalfv
