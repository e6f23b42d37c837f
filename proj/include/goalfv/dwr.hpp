// Dual-weighted-residual machinery: the embedded coarse/fine pair,
// prolongation, error representation, per-element indicators, dynamic
// tolerance selection, and the two adaptation drivers (exact dual on the
// embedded fine mesh, surrogate dual directly on the current mesh).
#pragma once

#include <functional>
#include <optional>

#include "goalfv/dist_fit.hpp"
#include "goalfv/dual.hpp"
#include "goalfv/features.hpp"

namespace goalfv {

/// Coarse mesh plus its one-level uniform refinement. Element ids below the
/// coarse element count are shared between the two meshes, so every coarse
/// active element maps to exactly 4 fine children.
struct EmbeddedPair {
  MeshHierarchy fine;
  PatchCache fine_cache;
  std::vector<std::array<int, 4>> children_of;  // coarse active idx -> fine active idcs

  static EmbeddedPair build(const MeshHierarchy& coarse);
};

/// Coarse solution mapped into the fine space: child values are the parent's
/// limited linear reconstruction at the child barycenter, falling back to the
/// parent average (all four children) if any child state is inadmissible.
std::vector<State4> prolongate(const std::vector<State4>& u_coarse,
                               const EmbeddedPair& pair, const MeshHierarchy& coarse,
                               const PatchCache& coarse_cache, double gamma,
                               bool use_limiter = true);

/// Fine-mesh residual at the prolongated state.
ResidualReport fine_residual(const std::vector<State4>& u_fine_prolonged,
                             const EmbeddedPair& pair, const FlowConfig& cfg,
                             const ResidualOptions& opts);

/// The additive correction -<z, R> of the error representation.
double error_correction(const std::vector<State4>& z, const std::vector<State4>& r);

/// Per-coarse-element indicator: sum over the 4 children of |<z_child, R_child>|.
std::vector<double> indicators(const std::vector<State4>& z_fine,
                               const std::vector<State4>& r_fine,
                               const EmbeddedPair& pair);

/// Surrogate-path indicator on the current mesh: |<z_i, R_i>| per element.
std::vector<double> indicators_current(const std::vector<State4>& z,
                                       const std::vector<State4>& r);

struct ToleranceResult {
  double tol = 0.0;
  std::vector<std::uint8_t> flags;  // eta > tol
  int flagged = 0;
  bool all_zero = false;
};

/// Sorts eta descending and takes TOL = eta_sorted[floor(proportion*n)];
/// flags strictly-greater entries, so the flagged count never exceeds
/// floor(proportion*n).
ToleranceResult dynamic_tolerance(const std::vector<double>& eta, double proportion);

ToleranceResult constant_tolerance(const std::vector<double>& eta, double tol);

struct AdaptConfig {
  double proportion = 0.7;
  double coarsen_fraction = 0.0;
  int max_rounds = 4;
  bool tol_dynamic = true;
  double constant_tol = 0.0;
  bool solve_fine_primal = false;  // J_h(u_h) bookkeeping (Algorithm step kept optional)
};

struct AdaptReport {
  int round = 0;
  int elements_before = 0;
  int elements_after = 0;
  double refined_fraction = 0.0;  // flagged / elements_before
  double tol = 0.0;
  double j_coarse = 0.0;           // J_H(u_H)
  double j_fine_prolonged = 0.0;   // J_h(u_h^H); equals j_coarse on the surrogate path
  double correction = 0.0;         // -<z, R>
  double j_estimate = 0.0;         // j_fine_prolonged + correction
  std::optional<double> j_fine;    // J_h(u_h) when the fine primal solve ran
  double dual_wall_seconds = 0.0;
  double total_wall_seconds = 0.0;
  double primal_residual_l1 = 0.0;
  int flagged = 0;
  int coarsen_merges = 0;
  int closure_red_splits = 0;    // red splits beyond the flagged set
  int closure_green_splits = 0;
  FitReport distribution;
};

struct SolverConfig {
  NewtonOptions newton;
  DualOptions dual;
  // tighter tolerance for the optional fine-mesh primal solve (0 keeps the
  // coarse tolerance); J_h(u_h) is bookkeeping and reads better solved hard
  double fine_newton_tol = 0.0;
};

struct AdaptStepResult {
  AdaptReport report;
  std::vector<State4> u_next;       // converged solution transferred to the new mesh
  std::vector<State4> u_converged;  // on the pre-adaptation mesh
  std::vector<State4> z_on_mesh;    // dual restricted to the pre-adaptation mesh
  std::vector<double> eta;          // indicators on the pre-adaptation mesh
};

struct Dataset;

/// One round of Algorithm-1-style adaptation: coarse solve, embedded pair,
/// prolongation, fine residual, exact dual on the fine mesh, indicators,
/// tolerance, coarsen + refine. Mutates `mesh`. When `dataset_out` is given,
/// the fine-mesh rows (features at u_h^H with the exact dual as target) are
/// appended to it.
AdaptStepResult adapt_step_exact(MeshHierarchy& mesh, const std::vector<State4>& u0,
                                 const FlowConfig& cfg, const FunctionalSpec& spec,
                                 const AdaptConfig& adapt, const SolverConfig& solver,
                                 Dataset* dataset_out = nullptr);

/// Per-element dual predictor: feature rows in, dual states out.
using DualPredictor =
    std::function<std::vector<State4>(const std::vector<FeatureRow>&)>;

/// One round of Algorithm-2-style adaptation: coarse solve, surrogate dual
/// directly on the current mesh, indicators from the unlimited-trace
/// residual, tolerance, coarsen + refine. No fine-mesh work anywhere.
AdaptStepResult adapt_step_surrogate(MeshHierarchy& mesh, const std::vector<State4>& u0,
                                     const FlowConfig& cfg, const FunctionalSpec& spec,
                                     const AdaptConfig& adapt, const SolverConfig& solver,
                                     const DualPredictor& predict);

/// Carries a per-element field across refine/coarsen: children inherit their
/// ancestor's value, merged parents take the area-weighted child mean.
class FieldTransfer {
 public:
  FieldTransfer(const MeshHierarchy& mesh, const std::vector<State4>& u);
  void note_merges(const std::vector<CoarsenMerge>& merges);
  void note_coarsen(const CoarsenReport& rep) { note_merges(rep.merge_list); }
  void note_refine(const RefineReport& rep) { note_merges(rep.green_merge_list); }
  std::vector<State4> rebuild(const MeshHierarchy& mesh) const;

 private:
  std::unordered_map<int, State4> by_id_;
};

}  // namespace goalfv
