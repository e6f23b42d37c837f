#include "goalfv/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace goalfv {

PatchCache build_patch_cache(const MeshHierarchy& mesh) {
  const int n = mesh.active_count();
  PatchCache cache;
  cache.mesh_stamp = mesh.stamp();
  cache.offsets.assign(n + 1, 0);

  // edge-adjacent neighbors
  std::vector<std::vector<int>> nbr(n);
  for (const auto& e : mesh.edges()) {
    if (e.right < 0) continue;
    const int li = mesh.active_index_of(e.left);
    const int ri = mesh.active_index_of(e.right);
    nbr[li].push_back(ri);
    nbr[ri].push_back(li);
  }

  // vertex adjacency, built lazily for the patches that need extension
  std::vector<std::vector<int>> node_elems;
  const auto build_node_elems = [&]() {
    node_elems.assign(mesh.nodes().size(), {});
    for (int i = 0; i < n; ++i) {
      const int id = mesh.active_ids()[i];
      for (int k : mesh.elements()[id].nodes) node_elems[k].push_back(i);
    }
  };

  for (int i = 0; i < n; ++i) {
    auto& p = nbr[i];
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    if (static_cast<int>(p.size()) >= 3) continue;
    if (node_elems.empty()) build_node_elems();
    std::unordered_set<int> have(p.begin(), p.end());
    have.insert(i);
    const int id = mesh.active_ids()[i];
    for (int k : mesh.elements()[id].nodes) {
      for (int j : node_elems[k]) {
        if (have.insert(j).second) p.push_back(j);
      }
    }
    // widen ring by ring on meshes so thin that vertex adjacency is not enough
    for (int ring = 0; ring < 3 && static_cast<int>(p.size()) < 3; ++ring) {
      const std::vector<int> frontier = p;
      for (int f : frontier) {
        const int fid = mesh.active_ids()[f];
        for (int k : mesh.elements()[fid].nodes)
          for (int j : node_elems[k])
            if (have.insert(j).second) p.push_back(j);
      }
    }
    std::sort(p.begin(), p.end());
    if (static_cast<int>(p.size()) < 3)
      throw MeshError("reconstruction patch of element " + std::to_string(id) +
                      " has fewer than 3 members even after vertex extension");
  }

  for (int i = 0; i < n; ++i) cache.offsets[i + 1] = cache.offsets[i] + static_cast<int>(nbr[i].size());
  cache.neighbors.resize(cache.offsets[n]);
  cache.weights.resize(cache.offsets[n]);

  for (int i = 0; i < n; ++i) {
    const Vec2 xi = mesh.barycenter_by_index(i);
    double mxx = 0, mxy = 0, myy = 0;
    for (std::size_t j = 0; j < nbr[i].size(); ++j) {
      const Vec2 d = mesh.barycenter_by_index(nbr[i][j]) - xi;
      mxx += d.x * d.x;
      mxy += d.x * d.y;
      myy += d.y * d.y;
    }
    const double det = mxx * myy - mxy * mxy;
    const double scale = mxx + myy;
    if (!(det > 1e-13 * scale * scale))
      throw MeshError("degenerate (collinear) reconstruction patch at active index " +
                      std::to_string(i));
    for (std::size_t j = 0; j < nbr[i].size(); ++j) {
      const Vec2 d = mesh.barycenter_by_index(nbr[i][j]) - xi;
      const int slot = cache.offsets[i] + static_cast<int>(j);
      cache.neighbors[slot] = nbr[i][j];
      cache.weights[slot] = {(myy * d.x - mxy * d.y) / det,
                             (mxx * d.y - mxy * d.x) / det};
    }
  }
  return cache;
}

std::vector<Grad4> reconstruct(const std::vector<State4>& field,
                               const PatchCache& cache, const MeshHierarchy& mesh) {
  if (cache.mesh_stamp != mesh.stamp())
    throw MeshError("patch cache is stale: mesh was modified after build_patch_cache");
  const int n = mesh.active_count();
  if (static_cast<int>(field.size()) != n)
    throw MeshError("field length does not match active element count");

  std::vector<Grad4> out(n);
#pragma omp parallel for schedule(static)
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
           const MeshHierarchy& mesh, std::vector<Grad4>& gradients,
           std::vector<std::array<double, 4>>* factors) {
  if (cache.mesh_stamp != mesh.stamp())
    throw MeshError("patch cache is stale: mesh was modified after build_patch_cache");
  const int n = mesh.active_count();
  if (factors) factors->assign(n, {1, 1, 1, 1});

#pragma omp parallel for schedule(static)
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
    if (factors) (*factors)[i] = phi;
  }
}

State4 trace_at(const State4& u, const Grad4& g, Vec2 cell_center, Vec2 x) {
  const Vec2 d = x - cell_center;
  State4 t = u;
  for (int c = 0; c < 4; ++c) t[c] += g.g[c].x * d.x + g.g[c].y * d.y;
  return t;
}

}  // namespace goalfv
