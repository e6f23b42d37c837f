// Linear solvers for the block system: a geometric multilevel V-cycle built
// over the refinement tree, and restarted GMRES with block-Jacobi
// preconditioning. Block SGS smoothing sweeps are sequential by contract.
#pragma once

#include <stdexcept>
#include <vector>

#include "goalfv/block_system.hpp"

namespace goalfv {

enum class LinearMethod { Multilevel, GMRES };

struct LinearOptions {
  double tol_rel = 1e-2;
  int max_iterations = 200;
  int restart = 30;
  int pre_sweeps = 3;
  int post_sweeps = 3;
  // stagnation: no 10x residual drop within this many iterations
  int stagnation_window = 200;
};

struct LinearResult {
  std::vector<State4> x;
  double rel_residual = 1.0;
  int iterations = 0;
  bool converged = false;
};

struct SolverStagnation : std::runtime_error {
  explicit SolverStagnation(std::string msg, LinearResult best_in)
      : std::runtime_error(std::move(msg)), best(std::move(best_in)) {}
  LinearResult best;
};

/// One forward (or backward) block Gauss-Seidel sweep: x <- x + D^-1-ish
/// update in element order. Sequential by contract.
void block_sgs_sweep(const BlockSystem& a, const std::vector<State4>& b,
                     std::vector<State4>& x, bool backward);

/// Aggregation hierarchy over the mesh refinement tree with
/// piecewise-constant transfer (restriction sums children, prolongation
/// injects), plus Galerkin coarse operators.
class MultilevelHierarchy {
 public:
  MultilevelHierarchy(const BlockSystem& fine, const MeshHierarchy& mesh);

  /// One V-cycle applied to a x = b, starting from x.
  void v_cycle(const BlockSystem& fine, const std::vector<State4>& b,
               std::vector<State4>& x, const LinearOptions& opts) const;

  int levels() const { return static_cast<int>(coarse_.size()) + 1; }

 private:
  void cycle(int level, const BlockSystem& a, const std::vector<State4>& b,
             std::vector<State4>& x, const LinearOptions& opts) const;

  // aggregate_of_[l][i]: coarse index at level l+1 of index i at level l
  std::vector<std::vector<int>> aggregate_of_;
  std::vector<BlockSystem> coarse_;
};

/// Solve to the relative residual in opts; multilevel needs the mesh that the
/// system was assembled on. Throws SolverStagnation (carrying the best
/// iterate) when the residual fails to drop 10x within the window.
LinearResult solve_linear(const BlockSystem& system, const MeshHierarchy& mesh,
                          LinearMethod method, const LinearOptions& opts = {});

/// GMRES only; usable without mesh information (e.g. transposed systems).
LinearResult solve_gmres(const BlockSystem& system, const LinearOptions& opts = {});

double l1_norm(const std::vector<State4>& v);
double l2_norm(const std::vector<State4>& v);

}  // namespace goalfv
