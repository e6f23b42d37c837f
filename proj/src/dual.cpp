#include "goalfv/dual.hpp"

namespace goalfv {

BlockSystem assemble_dual_system(const std::vector<State4>& u, const MeshHierarchy& mesh,
                                 const PatchCache& cache, const FlowConfig& cfg,
                                 const FunctionalSpec& spec, double alpha_reg,
                                 const ResidualOptions& opts) {
  double shift = 0.0;
  if (alpha_reg != 0.0) {
    const ResidualReport rep = assemble_residual(u, mesh, cache, cfg, opts);
    shift = alpha_reg * l1_norm(rep.r);
  }
  BlockSystem primal = assemble_jacobian(u, mesh, cfg, opts, shift);
  BlockSystem dual = primal.transposed();
  dual.rhs = linearize_functional(u, mesh, cache, cfg, spec, opts);
  return dual;
}

DualField solve_dual(const std::vector<State4>& u, const MeshHierarchy& mesh,
                     const PatchCache& cache, const FlowConfig& cfg,
                     const FunctionalSpec& spec, const DualOptions& opts) {
  const BlockSystem sys =
      assemble_dual_system(u, mesh, cache, cfg, spec, opts.alpha_reg, opts.residual);
  LinearOptions lopts;
  lopts.tol_rel = opts.tol_rel;
  lopts.max_iterations = opts.max_iterations;
  lopts.restart = opts.restart;
  lopts.stagnation_window = std::max(2000, opts.restart * 10);
  const LinearResult res = solve_linear(sys, mesh, opts.method, lopts);
  DualField out;
  out.z = res.x;
  return out;
}

}  // namespace goalfv
