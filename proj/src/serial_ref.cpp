#include "goalfv/serial_ref.hpp"

#include <algorithm>
#include <cmath>

namespace goalfv::serial {

std::vector<Grad4> reconstruct(const std::vector<State4>& field,
                               const PatchCache& cache, const MeshHierarchy& mesh) {
  if (cache.mesh_stamp != mesh.stamp())
    throw MeshError("patch cache is stale");
  const int n = mesh.active_count();
  std::vector<Grad4> out(n);
  for (int i = 0; i < n; ++i) {
    const State4& ui = field[i];
    Grad4 g;
    for (int s = cache.offsets[i]; s < cache.offsets[i + 1]; ++s) {
      const State4 du = field[cache.neighbors[s]] - ui;
      const Vec2 w = cache.weights[s];
      for (int c = 0; c < 4; ++c) {
        g.g[c].x += w.x * du[c];
        g.g[c].y += w.y * du[c];
      }
    }
    out[i] = g;
  }
  return out;
}

void limit(const std::vector<State4>& field, const PatchCache& cache,
           const MeshHierarchy& mesh, std::vector<Grad4>& gradients) {
  const int n = mesh.active_count();
  for (int i = 0; i < n; ++i) {
    State4 lo = field[i], hi = field[i];
    for (int s = cache.offsets[i]; s < cache.offsets[i + 1]; ++s) {
      const State4& uj = field[cache.neighbors[s]];
      for (int c = 0; c < 4; ++c) {
        lo[c] = std::min(lo[c], uj[c]);
        hi[c] = std::max(hi[c], uj[c]);
      }
    }
    const int id = mesh.active_ids()[i];
    const Vec2 xc = mesh.barycenter_by_index(i);
    const auto& en = mesh.elements()[id].nodes;
    std::array<double, 4> phi = {1, 1, 1, 1};
    for (int k = 0; k < 3; ++k) {
      const auto& a = mesh.nodes()[en[k]];
      const auto& b = mesh.nodes()[en[(k + 1) % 3]];
      const Vec2 xm = {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
      for (int c = 0; c < 4; ++c) {
        const double delta = dot(gradients[i].g[c], xm - xc);
        double r = 1.0;
        if (delta > 0.0)
          r = (hi[c] - field[i][c]) / delta;
        else if (delta < 0.0)
          r = (lo[c] - field[i][c]) / delta;
        phi[c] = std::min(phi[c], std::min(1.0, r));
      }
    }
    for (int c = 0; c < 4; ++c) {
      gradients[i].g[c].x *= phi[c];
      gradients[i].g[c].y *= phi[c];
    }
  }
}

ResidualReport assemble_residual(const std::vector<State4>& u,
                                 const MeshHierarchy& mesh, const PatchCache& cache,
                                 const FlowConfig& cfg, const ResidualOptions& opts) {
  const int n = mesh.active_count();
  std::vector<Grad4> grads;
  if (!opts.first_order) {
    grads = serial::reconstruct(u, cache, mesh);
    if (opts.use_limiter) serial::limit(u, cache, mesh, grads);
  }

  ResidualReport rep;
  rep.r.assign(n, State4{});
  const State4 u_inf = freestream_state(cfg);
  const auto trace = [&](int elem_id, const Edge& ed) {
    const int i = mesh.active_index_of(elem_id);
    if (opts.first_order) return u[i];
    const auto& a = mesh.nodes()[ed.nodes[0]];
    const auto& b = mesh.nodes()[ed.nodes[1]];
    const Vec2 xm = {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
    const State4 t = trace_at(u[i], grads[i], mesh.barycenter(elem_id), xm);
    if (admissible(t, cfg.gamma)) return t;
    ++rep.trace_fallbacks;
    return u[i];
  };

  // single pass over edges, scattering into both sides
  for (const auto& ed : mesh.edges()) {
    State4 f;
    switch (ed.marker) {
      case BoundaryMarker::interior:
        f = numerical_flux(trace(ed.left, ed), trace(ed.right, ed), ed.normal,
                           cfg.gamma, opts.scheme);
        break;
      case BoundaryMarker::wall:
        f = wall_flux(trace(ed.left, ed), ed.normal, cfg.gamma);
        break;
      case BoundaryMarker::farfield:
        f = numerical_flux(trace(ed.left, ed), u_inf, ed.normal, cfg.gamma, opts.scheme);
        break;
    }
    f = ed.length * f;
    rep.r[mesh.active_index_of(ed.left)] += f;
    if (ed.right >= 0) rep.r[mesh.active_index_of(ed.right)] -= f;
  }
  return rep;
}

void cell_update(std::vector<State4>& u, const std::vector<State4>& du, double scale) {
  for (std::size_t i = 0; i < u.size(); ++i) u[i] += scale * du[i];
}

}  // namespace goalfv::serial

namespace goalfv {

void cell_update(std::vector<State4>& u, const std::vector<State4>& du, double scale) {
  const int n = static_cast<int>(u.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) u[i] += scale * du[i];
}

}  // namespace goalfv
