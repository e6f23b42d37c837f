#include "goalfv/functional.hpp"

#include <cmath>

namespace goalfv {

FunctionalSpec make_functional(FunctionalKind kind, const FlowConfig& cfg) {
  FunctionalSpec spec;
  spec.kind = kind;
  spec.alpha_deg = cfg.alpha_deg;
  const State4 inf = freestream_state(cfg);
  const double v2 = (inf.mx * inf.mx + inf.my * inf.my) / (inf.rho * inf.rho);
  spec.c_norm = 0.5 * cfg.rho_inf * v2;
  return spec;
}

Vec2 beta_vector(const FunctionalSpec& spec) {
  if (!(spec.c_norm > 0.0)) throw std::invalid_argument("c_norm must be positive");
  const double a = spec.alpha_deg * M_PI / 180.0;
  if (spec.kind == FunctionalKind::Drag)
    return {std::cos(a) / spec.c_norm, std::sin(a) / spec.c_norm};
  return {-std::sin(a) / spec.c_norm, std::cos(a) / spec.c_norm};
}

double evaluate_functional(const std::vector<State4>& u, const MeshHierarchy& mesh,
                           const PatchCache& cache, const FlowConfig& cfg,
                           const FunctionalSpec& spec, const ResidualOptions& opts) {
  if (mesh.count_wall_edges() == 0)
    throw MeshError("functional evaluation needs a mesh with wall edges");
  const Vec2 beta = beta_vector(spec);
  const std::vector<Grad4> grads = residual_gradients(u, cache, mesh, opts);
  const EdgeTraces traces = compute_edge_traces(u, grads, mesh, cfg.gamma, opts);

  double j = 0.0;
  for (std::size_t e = 0; e < mesh.edges().size(); ++e) {
    const Edge& ed = mesh.edges()[e];
    if (ed.marker != BoundaryMarker::wall) continue;
    // identical boundary-pressure evaluation to wall_flux in the residual
    const double p = pressure(traces.left[e], cfg.gamma);
    j += p * dot(ed.normal, beta) * ed.length;
  }
  return j;
}

std::vector<State4> linearize_functional(const std::vector<State4>& u,
                                         const MeshHierarchy& mesh,
                                         const PatchCache& cache, const FlowConfig& cfg,
                                         const FunctionalSpec& spec,
                                         const ResidualOptions& opts) {
  if (mesh.count_wall_edges() == 0)
    throw MeshError("functional linearization needs a mesh with wall edges");
  const int n = mesh.active_count();
  const Vec2 beta = beta_vector(spec);

  // limiter factors frozen at the evaluation state
  std::vector<std::array<double, 4>> phi;
  ResidualOptions ropts = opts;
  if (!opts.first_order) {
    if (opts.frozen_limiter) {
      phi = *opts.frozen_limiter;
    } else if (opts.use_limiter) {
      std::vector<Grad4> g = reconstruct(u, cache, mesh);
      limit(u, cache, mesh, g, &phi);
    } else {
      phi.assign(n, {1, 1, 1, 1});
    }
    ropts.frozen_limiter = &phi;
    ropts.use_limiter = false;
  }
  const std::vector<Grad4> grads = residual_gradients(u, cache, mesh, ropts);
  const EdgeTraces traces = compute_edge_traces(u, grads, mesh, cfg.gamma, ropts);

  std::vector<State4> dj(n, State4{});
  const double g1 = cfg.gamma - 1.0;

  for (std::size_t e = 0; e < mesh.edges().size(); ++e) {
    const Edge& ed = mesh.edges()[e];
    if (ed.marker != BoundaryMarker::wall) continue;
    const int i = mesh.active_index_of(ed.left);
    const double w = dot(ed.normal, beta) * ed.length;

    const State4& t = traces.left[e];
    const double vx = t.mx / t.rho;
    const double vy = t.my / t.rho;
    const State4 dp_dt = {g1 * 0.5 * (vx * vx + vy * vy), -g1 * vx, -g1 * vy, g1};

    if (opts.first_order || traces.left_is_average[e]) {
      // trace is the cell average itself
      for (int c = 0; c < 4; ++c) dj[i][c] += w * dp_dt[c];
      continue;
    }

    const auto& a = mesh.nodes()[ed.nodes[0]];
    const auto& b = mesh.nodes()[ed.nodes[1]];
    const Vec2 xm = {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
    const Vec2 d = xm - mesh.barycenter(ed.left);

    // t_c = u_ic + phi_c * sum_j (W_j . d)(u_jc - u_ic)
    double sum_wd = 0.0;
    for (int s = cache.offsets[i]; s < cache.offsets[i + 1]; ++s)
      sum_wd += dot(cache.weights[s], d);
    for (int c = 0; c < 4; ++c) {
      const double f = phi[i][c];
      dj[i][c] += w * dp_dt[c] * (1.0 - f * sum_wd);
      for (int s = cache.offsets[i]; s < cache.offsets[i + 1]; ++s) {
        dj[cache.neighbors[s]][c] += w * dp_dt[c] * f * dot(cache.weights[s], d);
      }
    }
  }
  return dj;
}

}  // namespace goalfv
