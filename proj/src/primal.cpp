#include "goalfv/primal.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace goalfv {

std::vector<Grad4> residual_gradients(const std::vector<State4>& u,
                                      const PatchCache& cache,
                                      const MeshHierarchy& mesh,
                                      const ResidualOptions& opts) {
  if (opts.first_order) return {};
  std::vector<Grad4> g = reconstruct(u, cache, mesh);
  if (opts.frozen_limiter) {
    const auto& phi = *opts.frozen_limiter;
    const int n = static_cast<int>(g.size());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < 4; ++c) {
        g[i].g[c].x *= phi[i][c];
        g[i].g[c].y *= phi[i][c];
      }
  } else if (opts.use_limiter) {
    limit(u, cache, mesh, g);
  }
  return g;
}

EdgeTraces compute_edge_traces(const std::vector<State4>& u,
                               const std::vector<Grad4>& gradients,
                               const MeshHierarchy& mesh, double gamma,
                               const ResidualOptions& opts) {
  const auto& edges = mesh.edges();
  const int ne = static_cast<int>(edges.size());
  EdgeTraces t;
  t.left.resize(ne);
  t.right.resize(ne);
  t.left_is_average.assign(ne, 0);
  t.right_is_average.assign(ne, 0);
  std::atomic<int> fallbacks{0};

  const bool first_order = opts.first_order || gradients.empty();

#pragma omp parallel for schedule(static)
  for (int e = 0; e < ne; ++e) {
    const Edge& ed = edges[e];
    const auto& a = mesh.nodes()[ed.nodes[0]];
    const auto& b = mesh.nodes()[ed.nodes[1]];
    const Vec2 xm = {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};

    const int li = mesh.active_index_of(ed.left);
    if (first_order) {
      t.left[e] = u[li];
      t.left_is_average[e] = 1;
    } else {
      const State4 tr = trace_at(u[li], gradients[li], mesh.barycenter(ed.left), xm);
      if (admissible(tr, gamma)) {
        t.left[e] = tr;
      } else {
        t.left[e] = u[li];
        t.left_is_average[e] = 1;
        fallbacks.fetch_add(1, std::memory_order_relaxed);
      }
    }

    if (ed.right >= 0) {
      const int ri = mesh.active_index_of(ed.right);
      if (first_order) {
        t.right[e] = u[ri];
        t.right_is_average[e] = 1;
      } else {
        const State4 tr = trace_at(u[ri], gradients[ri], mesh.barycenter(ed.right), xm);
        if (admissible(tr, gamma)) {
          t.right[e] = tr;
        } else {
          t.right[e] = u[ri];
          t.right_is_average[e] = 1;
          fallbacks.fetch_add(1, std::memory_order_relaxed);
        }
      }
    }
  }
  t.fallback_count = fallbacks.load();
  return t;
}

ResidualReport assemble_residual(const std::vector<State4>& u,
                                 const MeshHierarchy& mesh, const PatchCache& cache,
                                 const FlowConfig& cfg, const ResidualOptions& opts) {
  const int n = mesh.active_count();
  if (static_cast<int>(u.size()) != n)
    throw MeshError("state length does not match active element count");

  const std::vector<Grad4> grads = residual_gradients(u, cache, mesh, opts);
  const EdgeTraces traces = compute_edge_traces(u, grads, mesh, cfg.gamma, opts);

  const auto& edges = mesh.edges();
  const int ne = static_cast<int>(edges.size());
  std::vector<State4> edge_flux(ne);
  const State4 u_inf = freestream_state(cfg);

  // pass 1: edge fluxes in parallel
#pragma omp parallel for schedule(static)
  for (int e = 0; e < ne; ++e) {
    const Edge& ed = edges[e];
    State4 f;
    switch (ed.marker) {
      case BoundaryMarker::interior:
        f = numerical_flux(traces.left[e], traces.right[e], ed.normal, cfg.gamma,
                           opts.scheme);
        break;
      case BoundaryMarker::wall:
        f = wall_flux(traces.left[e], ed.normal, cfg.gamma);
        break;
      case BoundaryMarker::farfield:
        f = numerical_flux(traces.left[e], u_inf, ed.normal, cfg.gamma, opts.scheme);
        break;
    }
    edge_flux[e] = ed.length * f;
  }

  // pass 2: per-element reduction in local edge order (deterministic for any
  // thread count)
  ResidualReport rep;
  rep.r.assign(n, State4{});
  rep.trace_fallbacks = traces.fallback_count;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const int id = mesh.active_ids()[i];
    State4 acc{};
    for (int k = 0; k < 3; ++k) {
      const int e = mesh.element_edges(i)[k];
      if (edges[e].left == id)
        acc += edge_flux[e];
      else
        acc -= edge_flux[e];
    }
    rep.r[i] = acc;
  }
  return rep;
}

BlockSystem assemble_jacobian(const std::vector<State4>& u, const MeshHierarchy& mesh,
                              const FlowConfig& cfg, const ResidualOptions& opts,
                              double diagonal_shift) {
  const int n = mesh.active_count();
  if (static_cast<int>(u.size()) != n)
    throw MeshError("state length does not match active element count");
  BlockSystem sys = BlockSystem::from_mesh(mesh);
  const State4 u_inf = freestream_state(cfg);

  // first-order stencil: traces are the cell averages themselves
  for (const auto& ed : mesh.edges()) {
    const int li = mesh.active_index_of(ed.left);
    Mat4 dL, dR;
    switch (ed.marker) {
      case BoundaryMarker::interior: {
        const int ri = mesh.active_index_of(ed.right);
        flux_jacobians(u[li], u[ri], ed.normal, cfg.gamma, opts.scheme, dL, dR);
        mat4_add_scaled(sys.block(li, li), dL, ed.length);
        mat4_add_scaled(sys.block(li, ri), dR, ed.length);
        mat4_add_scaled(sys.block(ri, ri), dR, -ed.length);
        mat4_add_scaled(sys.block(ri, li), dL, -ed.length);
        break;
      }
      case BoundaryMarker::wall: {
        const Mat4 dw = wall_flux_jacobian(u[li], ed.normal, cfg.gamma);
        mat4_add_scaled(sys.block(li, li), dw, ed.length);
        break;
      }
      case BoundaryMarker::farfield: {
        flux_jacobians(u[li], u_inf, ed.normal, cfg.gamma, opts.scheme, dL, dR);
        mat4_add_scaled(sys.block(li, li), dL, ed.length);
        break;
      }
    }
  }
  if (diagonal_shift != 0.0) sys.add_diagonal_shift(diagonal_shift);
  return sys;
}

NewtonState newton_solve(const std::vector<State4>& u0, const MeshHierarchy& mesh,
                         const PatchCache& cache, const FlowConfig& cfg,
                         const NewtonOptions& opts) {
  const int n = mesh.active_count();
  NewtonState st;
  st.u = u0;
  st.alpha_reg = opts.alpha_reg;
  for (const auto& ui : st.u)
    if (!admissible(ui, cfg.gamma))
      throw NewtonError("initial state is not admissible");

  const auto t_start = std::chrono::steady_clock::now();
  const auto elapsed = [&]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
        .count();
  };

  ResidualOptions ropts = opts.residual;
  std::vector<double> rn_history;
  int last_freeze = -1;

  for (int it = 0; it <= opts.max_iterations; ++it) {
    // hard BJ clipping can cycle instead of converging; whenever the residual
    // stalls, re-pin the limiter factors at the current (better) state
    if (opts.limiter_stall_window > 0 && opts.residual.use_limiter &&
        !opts.residual.first_order && opts.residual.frozen_limiter == nullptr &&
        static_cast<int>(rn_history.size()) > opts.limiter_stall_window &&
        it - last_freeze > opts.limiter_stall_window) {
      const double past = rn_history[rn_history.size() - 1 - opts.limiter_stall_window];
      if (rn_history.back() > 0.9 * past) {
        std::vector<Grad4> g = reconstruct(st.u, cache, mesh);
        limit(st.u, cache, mesh, g, &st.frozen_phi);
        ropts.frozen_limiter = &st.frozen_phi;
        st.limiter_was_frozen = true;
        last_freeze = it;
      }
    }

    const ResidualReport rep = assemble_residual(st.u, mesh, cache, cfg, ropts);
    st.trace_fallbacks += rep.trace_fallbacks;
    const double rn = l1_norm(rep.r);
    rn_history.push_back(rn);
    st.residual_norm_l1 = rn;
    st.iterations = it;
    NewtonHistoryRow row;
    row.iteration = it;
    row.residual_l1 = rn;
    row.wall_seconds = elapsed();
    if (!std::isfinite(rn)) throw NewtonError("residual diverged (non-finite norm)");
    if (rn <= opts.tol_residual) {
      st.history.push_back(row);
      return st;
    }
    if (it == opts.max_iterations) {
      st.history.push_back(row);
      throw NewtonNotConverged("newton_solve: residual " + std::to_string(rn) +
                                   " above tolerance after " + std::to_string(it) +
                                   " iterations",
                               std::move(st));
    }

    const double shift = opts.alpha_reg * rn;
    st.final_diagonal_shift = shift;
    BlockSystem sys = assemble_jacobian(st.u, mesh, cfg, ropts, shift);
    for (int i = 0; i < n; ++i) sys.rhs[i] = -1.0 * rep.r[i];

    LinearResult lin;
    try {
      lin = solve_linear(sys, mesh, opts.linear_method, opts.linear);
    } catch (const SolverStagnation& s) {
      lin = s.best;  // inexact Newton: use the best iterate we got
    }
    row.linear_iters = lin.iterations;

    // admissibility line search on the cell averages
    double scale = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      bool ok = true;
      for (int i = 0; i < n; ++i) {
        const State4 cand = st.u[i] + scale * lin.x[i];
        if (!admissible(cand, cfg.gamma)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        for (int i = 0; i < n; ++i) st.u[i] += scale * lin.x[i];
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    st.history.push_back(row);
    if (!accepted)
      throw NewtonNotConverged(
          "newton_solve: admissibility line search exhausted at iteration " +
              std::to_string(it),
          std::move(st));
  }
  throw NewtonError("unreachable");
}

NewtonNotConverged::NewtonNotConverged(const std::string& msg, NewtonState state_in)
    : NewtonError(msg), state_(std::make_shared<NewtonState>(std::move(state_in))) {}

NewtonState NewtonNotConverged::state() const { return *state_; }

ResidualOptions converged_residual_options(const NewtonOptions& opts,
                                           const NewtonState& state) {
  ResidualOptions ropts = opts.residual;
  if (state.limiter_was_frozen) ropts.frozen_limiter = &state.frozen_phi;
  return ropts;
}

void write_history_csv(const std::vector<NewtonHistoryRow>& history,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "iteration,residual_l1,linear_iters,wall_seconds\n";
  char buf[128];
  for (const auto& row : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%d,%.6f\n", row.iteration,
                  row.residual_l1, row.linear_iters, row.wall_seconds);
    out << buf;
  }
}

}  // namespace goalfv
