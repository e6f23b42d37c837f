#include "goalfv/dwr.hpp"

#include "goalfv/surrogate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace goalfv {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

EmbeddedPair EmbeddedPair::build(const MeshHierarchy& coarse) {
  EmbeddedPair pair;
  pair.fine = coarse;  // element ids are shared between the two meshes
  const std::vector<int> coarse_ids = coarse.active_ids();
  pair.fine.uniform_refine(1);
  pair.fine_cache = build_patch_cache(pair.fine);
  pair.children_of.resize(coarse_ids.size());
  for (std::size_t i = 0; i < coarse_ids.size(); ++i) {
    const Element& parent = pair.fine.elements()[coarse_ids[i]];
    if (parent.n_children != 4)
      throw MeshError("embedded pair: coarse element did not split into 4 children");
    for (int c = 0; c < 4; ++c)
      pair.children_of[i][c] = pair.fine.active_index_of(parent.children[c]);
  }
  return pair;
}

std::vector<State4> prolongate(const std::vector<State4>& u_coarse,
                               const EmbeddedPair& pair, const MeshHierarchy& coarse,
                               const PatchCache& coarse_cache, double gamma,
                               bool use_limiter) {
  const int nc = coarse.active_count();
  if (static_cast<int>(u_coarse.size()) != nc)
    throw MeshError("prolongate: coarse field length mismatch");
  std::vector<Grad4> grads = reconstruct(u_coarse, coarse_cache, coarse);
  if (use_limiter) limit(u_coarse, coarse_cache, coarse, grads);

  std::vector<State4> out(pair.fine.active_count());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nc; ++i) {
    const Vec2 xc = coarse.barycenter_by_index(i);
    std::array<State4, 4> vals;
    bool ok = true;
    for (int c = 0; c < 4; ++c) {
      const int fi = pair.children_of[i][c];
      vals[c] = trace_at(u_coarse[i], grads[i], xc,
                         pair.fine.barycenter_by_index(fi));
      if (!admissible(vals[c], gamma)) ok = false;
    }
    for (int c = 0; c < 4; ++c)
      out[pair.children_of[i][c]] = ok ? vals[c] : u_coarse[i];
  }
  return out;
}

ResidualReport fine_residual(const std::vector<State4>& u_fine_prolonged,
                             const EmbeddedPair& pair, const FlowConfig& cfg,
                             const ResidualOptions& opts) {
  return assemble_residual(u_fine_prolonged, pair.fine, pair.fine_cache, cfg, opts);
}

double error_correction(const std::vector<State4>& z, const std::vector<State4>& r) {
  if (z.size() != r.size())
    throw MeshError("error_correction: dual and residual lengths differ");
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += dot(z[i], r[i]);
  return -s;
}

std::vector<double> indicators(const std::vector<State4>& z_fine,
                               const std::vector<State4>& r_fine,
                               const EmbeddedPair& pair) {
  if (z_fine.size() != r_fine.size() ||
      static_cast<int>(z_fine.size()) != pair.fine.active_count())
    throw MeshError("indicators: fine field length mismatch");
  std::vector<double> eta(pair.children_of.size(), 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < static_cast<int>(pair.children_of.size()); ++i) {
    double s = 0.0;
    for (int c = 0; c < 4; ++c) {
      const int fi = pair.children_of[i][c];
      s += std::abs(dot(z_fine[fi], r_fine[fi]));
    }
    eta[i] = s;
  }
  return eta;
}

std::vector<double> indicators_current(const std::vector<State4>& z,
                                       const std::vector<State4>& r) {
  if (z.size() != r.size())
    throw MeshError("indicators_current: field length mismatch");
  std::vector<double> eta(z.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < static_cast<int>(z.size()); ++i)
    eta[i] = std::abs(dot(z[i], r[i]));
  return eta;
}

ToleranceResult dynamic_tolerance(const std::vector<double>& eta, double proportion) {
  const int n = static_cast<int>(eta.size());
  if (n < 1) throw std::invalid_argument("dynamic_tolerance: empty indicator field");
  if (!(proportion > 0.0 && proportion < 1.0))
    throw std::invalid_argument("dynamic_tolerance: proportion must be in (0,1)");
  std::vector<double> sorted = eta;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  const int k = static_cast<int>(std::floor(proportion * n));
  ToleranceResult res;
  res.tol = sorted[std::min(k, n - 1)];
  res.all_zero = sorted.front() == 0.0;
  res.flags.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    if (eta[i] > res.tol) {
      res.flags[i] = 1;
      ++res.flagged;
    }
  }
  return res;
}

ToleranceResult constant_tolerance(const std::vector<double>& eta, double tol) {
  ToleranceResult res;
  res.tol = tol;
  res.flags.assign(eta.size(), 0);
  res.all_zero = true;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (eta[i] != 0.0) res.all_zero = false;
    if (eta[i] > tol) {
      res.flags[i] = 1;
      ++res.flagged;
    }
  }
  return res;
}

FieldTransfer::FieldTransfer(const MeshHierarchy& mesh, const std::vector<State4>& u) {
  const auto& ids = mesh.active_ids();
  for (std::size_t i = 0; i < ids.size(); ++i) by_id_.emplace(ids[i], u[i]);
}

void FieldTransfer::note_merges(const std::vector<CoarsenMerge>& merges) {
  for (const auto& mg : merges) {
    State4 sum{};
    double area = 0.0;
    for (int c = 0; c < mg.count; ++c) {
      auto it = by_id_.find(mg.children[c]);
      if (it == by_id_.end()) continue;
      sum += mg.child_areas[c] * it->second;
      area += mg.child_areas[c];
    }
    if (area > 0.0) by_id_[mg.parent] = (1.0 / area) * sum;
  }
}

std::vector<State4> FieldTransfer::rebuild(const MeshHierarchy& mesh) const {
  std::vector<State4> u(mesh.active_count());
  for (int i = 0; i < mesh.active_count(); ++i) {
    int id = mesh.active_ids()[i];
    auto it = by_id_.find(id);
    while (it == by_id_.end()) {
      id = mesh.elements()[id].parent;
      if (id < 0) throw MeshError("field transfer found no ancestor value");
      it = by_id_.find(id);
    }
    u[i] = it->second;
  }
  return u;
}

namespace {

// shared tail of both adaptation drivers: tolerance, coarsen, refine, transfer
void apply_marking(MeshHierarchy& mesh, const std::vector<double>& eta,
                   const AdaptConfig& adapt, const std::vector<State4>& u_conv,
                   AdaptReport& rep, AdaptStepResult& out) {
  const int n = mesh.active_count();
  const ToleranceResult tol = adapt.tol_dynamic
                                  ? dynamic_tolerance(eta, adapt.proportion)
                                  : constant_tolerance(eta, adapt.constant_tol);
  rep.tol = tol.tol;
  rep.flagged = tol.flagged;
  rep.refined_fraction = n > 0 ? double(tol.flagged) / n : 0.0;
  rep.distribution = distribution_diagnostic(eta);

  FieldTransfer transfer(mesh, u_conv);

  // coarsen the bottom fraction of the same sorted list, never an element
  // that is flagged for refinement
  if (adapt.coarsen_fraction > 0.0) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return eta[a] < eta[b]; });
    const int kc = static_cast<int>(std::floor(adapt.coarsen_fraction * n));
    std::vector<std::uint8_t> cflags(n, 0);
    for (int i = 0; i < kc; ++i)
      if (!tol.flags[order[i]]) cflags[order[i]] = 1;
    // remember ids before the mesh mutates
    std::vector<int> refine_ids;
    for (int i = 0; i < n; ++i)
      if (tol.flags[i]) refine_ids.push_back(mesh.active_ids()[i]);
    const CoarsenReport crep = mesh.coarsen(cflags);
    transfer.note_coarsen(crep);
    rep.coarsen_merges = crep.merges;
    std::vector<std::uint8_t> rflags(mesh.active_count(), 0);
    for (int id : refine_ids) rflags[mesh.active_index_of(id)] = 1;
    const RefineReport rrep = mesh.refine(rflags);
    transfer.note_refine(rrep);
    rep.closure_red_splits = rrep.red_splits - tol.flagged;
    rep.closure_green_splits = rrep.green_splits;
  } else {
    const RefineReport rrep = mesh.refine(tol.flags);
    transfer.note_refine(rrep);
    rep.closure_red_splits = rrep.red_splits - tol.flagged;
    rep.closure_green_splits = rrep.green_splits;
  }

  rep.elements_after = mesh.active_count();
  out.u_next = transfer.rebuild(mesh);
}

}  // namespace

AdaptStepResult adapt_step_exact(MeshHierarchy& mesh, const std::vector<State4>& u0,
                                 const FlowConfig& cfg, const FunctionalSpec& spec,
                                 const AdaptConfig& adapt, const SolverConfig& solver,
                                 Dataset* dataset_out) {
  const auto t0 = std::chrono::steady_clock::now();
  AdaptStepResult out;
  AdaptReport& rep = out.report;
  rep.elements_before = mesh.active_count();

  const PatchCache cache = build_patch_cache(mesh);
  const NewtonState primal = newton_solve(u0, mesh, cache, cfg, solver.newton);
  out.u_converged = primal.u;
  rep.primal_residual_l1 = primal.residual_norm_l1;
  const ResidualOptions coarse_opts = converged_residual_options(solver.newton, primal);
  rep.j_coarse = evaluate_functional(primal.u, mesh, cache, cfg, spec, coarse_opts);

  const EmbeddedPair pair = EmbeddedPair::build(mesh);
  const std::vector<State4> u_hH =
      prolongate(primal.u, pair, mesh, cache, cfg.gamma,
                 solver.newton.residual.use_limiter);
  const ResidualReport r_h = fine_residual(u_hH, pair, cfg, solver.newton.residual);
  rep.j_fine_prolonged = evaluate_functional(u_hH, pair.fine, pair.fine_cache, cfg,
                                             spec, solver.newton.residual);

  if (adapt.solve_fine_primal) {
    NewtonOptions fopts = solver.newton;
    if (solver.fine_newton_tol > 0.0) fopts.tol_residual = solver.fine_newton_tol;
    const NewtonState fine = newton_solve(u_hH, pair.fine, pair.fine_cache, cfg, fopts);
    rep.j_fine = evaluate_functional(fine.u, pair.fine, pair.fine_cache, cfg, spec,
                                     solver.newton.residual);
  }

  const auto t_dual = std::chrono::steady_clock::now();
  DualOptions dopts = solver.dual;
  dopts.residual = solver.newton.residual;
  BlockSystem dual_sys = assemble_dual_system(
      u_hH, pair.fine, pair.fine_cache, cfg, spec, 0.0, dopts.residual);
  // the dual regularization reuses the primal's final |R|_1, which is at the
  // Newton tolerance rather than the (much larger) prolongated fine residual
  dual_sys.add_diagonal_shift(dopts.alpha_reg * primal.residual_norm_l1);
  LinearOptions lopts;
  lopts.tol_rel = dopts.tol_rel;
  lopts.max_iterations = dopts.max_iterations;
  lopts.restart = dopts.restart;
  lopts.stagnation_window = std::max(2000, dopts.restart * 10);
  const LinearResult dual_res = solve_linear(dual_sys, pair.fine, dopts.method, lopts);
  rep.dual_wall_seconds = seconds_since(t_dual);

  rep.correction = error_correction(dual_res.x, r_h.r);
  rep.j_estimate = rep.j_fine_prolonged + rep.correction;
  out.eta = indicators(dual_res.x, r_h.r, pair);

  if (dataset_out)
    append_run_to_dataset(*dataset_out, pair.fine, u_hH, r_h.r, dual_res.x, cfg);

  // dual restricted to the current mesh (child mean) for field output
  out.z_on_mesh.assign(rep.elements_before, State4{});
  for (int i = 0; i < rep.elements_before; ++i) {
    State4 s{};
    for (int c = 0; c < 4; ++c) s += dual_res.x[pair.children_of[i][c]];
    out.z_on_mesh[i] = 0.25 * s;
  }

  apply_marking(mesh, out.eta, adapt, primal.u, rep, out);
  rep.total_wall_seconds = seconds_since(t0);
  return out;
}

AdaptStepResult adapt_step_surrogate(MeshHierarchy& mesh, const std::vector<State4>& u0,
                                     const FlowConfig& cfg, const FunctionalSpec& spec,
                                     const AdaptConfig& adapt, const SolverConfig& solver,
                                     const DualPredictor& predict) {
  const auto t0 = std::chrono::steady_clock::now();
  AdaptStepResult out;
  AdaptReport& rep = out.report;
  rep.elements_before = mesh.active_count();

  const PatchCache cache = build_patch_cache(mesh);
  const NewtonState primal = newton_solve(u0, mesh, cache, cfg, solver.newton);
  out.u_converged = primal.u;
  rep.primal_residual_l1 = primal.residual_norm_l1;
  const ResidualOptions coarse_opts = converged_residual_options(solver.newton, primal);
  rep.j_coarse = evaluate_functional(primal.u, mesh, cache, cfg, spec, coarse_opts);
  rep.j_fine_prolonged = rep.j_coarse;

  // current-mesh residual at the unlimited reconstructed state: the limited
  // residual vanished at convergence, the consistency-scale part survives
  ResidualOptions relax = solver.newton.residual;
  relax.use_limiter = false;
  relax.frozen_limiter = nullptr;
  const ResidualReport r_relax = assemble_residual(primal.u, mesh, cache, cfg, relax);

  const auto t_dual = std::chrono::steady_clock::now();
  const std::vector<FeatureRow> rows =
      extract_features(mesh, primal.u, r_relax.r, cfg);
  out.z_on_mesh = predict(rows);
  if (static_cast<int>(out.z_on_mesh.size()) != mesh.active_count())
    throw MeshError("dual predictor returned a field of the wrong length");
  rep.dual_wall_seconds = seconds_since(t_dual);

  out.eta = indicators_current(out.z_on_mesh, r_relax.r);
  rep.correction = error_correction(out.z_on_mesh, r_relax.r);
  rep.j_estimate = rep.j_coarse + rep.correction;

  apply_marking(mesh, out.eta, adapt, primal.u, rep, out);
  rep.total_wall_seconds = seconds_since(t0);
  return out;
}

}  // namespace goalfv
