// Residual assembly on limited linear reconstructions, the first-order
// (defect-correction) Jacobian, and the regularized Newton driver.
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "goalfv/block_system.hpp"
#include "goalfv/linear_solve.hpp"
#include "goalfv/reconstruct.hpp"

namespace goalfv {

struct ResidualOptions {
  FluxScheme scheme = FluxScheme::HLLC;
  bool use_limiter = true;
  bool first_order = false;  // traces = cell averages
  // When set, gradients are scaled by these fixed per-element factors instead
  // of re-evaluating the limiter. Newton freezes the limiter this way when
  // hard clipping makes the residual chatter around a limit cycle.
  const std::vector<std::array<double, 4>>* frozen_limiter = nullptr;
};

/// Left/right traces at every edge midpoint, with admissibility fallback to
/// the cell average (counted). This is the single evaluation path shared by
/// the residual and the goal functional, which keeps the discrete functional
/// dual-consistent with the discrete residual.
struct EdgeTraces {
  std::vector<State4> left;
  std::vector<State4> right;  // meaningful on interior edges only
  std::vector<std::uint8_t> left_is_average;
  std::vector<std::uint8_t> right_is_average;
  int fallback_count = 0;
};

EdgeTraces compute_edge_traces(const std::vector<State4>& u,
                               const std::vector<Grad4>& gradients,
                               const MeshHierarchy& mesh, double gamma,
                               const ResidualOptions& opts);

/// Gradients for the trace computation under `opts` (empty for first order).
std::vector<Grad4> residual_gradients(const std::vector<State4>& u,
                                      const PatchCache& cache,
                                      const MeshHierarchy& mesh,
                                      const ResidualOptions& opts);

struct ResidualReport {
  std::vector<State4> r;
  int trace_fallbacks = 0;
};

ResidualReport assemble_residual(const std::vector<State4>& u,
                                 const MeshHierarchy& mesh, const PatchCache& cache,
                                 const FlowConfig& cfg, const ResidualOptions& opts);

/// First-order edge-stencil Jacobian plus the alpha*|R|_1 diagonal shift.
/// The rhs is left zero.
BlockSystem assemble_jacobian(const std::vector<State4>& u, const MeshHierarchy& mesh,
                              const FlowConfig& cfg, const ResidualOptions& opts,
                              double diagonal_shift);

struct NewtonError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NewtonState;


struct NewtonOptions {
  double tol_residual = 1e-3;
  int max_iterations = 500;
  double alpha_reg = 2.0;
  LinearMethod linear_method = LinearMethod::Multilevel;
  LinearOptions linear;
  ResidualOptions residual;
  int max_halvings = 10;
  // freeze the limiter when the residual has not dropped 10% over this many
  // iterations (0 disables freezing)
  int limiter_stall_window = 30;
};

struct NewtonHistoryRow {
  int iteration = 0;
  double residual_l1 = 0.0;
  int linear_iters = 0;
  double wall_seconds = 0.0;
};

struct NewtonState {
  std::vector<State4> u;
  double residual_norm_l1 = 0.0;
  int iterations = 0;
  double alpha_reg = 0.0;
  double final_diagonal_shift = 0.0;
  int trace_fallbacks = 0;
  bool limiter_was_frozen = false;
  std::vector<std::array<double, 4>> frozen_phi;  // valid when limiter_was_frozen
  std::vector<NewtonHistoryRow> history;
};

/// Thrown when the iteration cap or the line search is exhausted; carries
/// the best state reached and the full history.
struct NewtonNotConverged : NewtonError {
  NewtonNotConverged(const std::string& msg, NewtonState state_in);
  NewtonState state() const;

 private:
  std::shared_ptr<NewtonState> state_;
};

NewtonState newton_solve(const std::vector<State4>& u0, const MeshHierarchy& mesh,
                         const PatchCache& cache, const FlowConfig& cfg,
                         const NewtonOptions& opts = {});

/// Residual options that reproduce exactly the discretization the Newton
/// solve converged with (points into `state` when the limiter was frozen).
ResidualOptions converged_residual_options(const NewtonOptions& opts,
                                           const NewtonState& state);

/// columns: iteration, residual_l1, linear_iters, wall_seconds
void write_history_csv(const std::vector<NewtonHistoryRow>& history,
                       const std::string& path);

}  // namespace goalfv
