// Per-element linear least-squares reconstruction with Barth-Jespersen
// limiting. Patch geometry is precomputed once per mesh topology and reused
// by every Newton step.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "goalfv/mesh.hpp"

namespace goalfv {

/// Gradient of the four conservative components on one element.
struct Grad4 {
  std::array<Vec2, 4> g{};
};

/// Least-squares patches: edge-adjacent neighbors, extended through vertex
/// adjacency until each patch has at least 3 members. The weights reproduce
/// exact gradients of affine fields.
struct PatchCache {
  std::uint64_t mesh_stamp = 0;
  std::vector<int> offsets;    // CSR over active indices, size n+1
  std::vector<int> neighbors;  // active indices
  std::vector<Vec2> weights;   // gradient = sum_j weights[j] * (u_j - u_i)

  int patch_size(int i) const { return offsets[i + 1] - offsets[i]; }
};

PatchCache build_patch_cache(const MeshHierarchy& mesh);

/// Unlimited least-squares gradients, element-parallel. Throws if the cache
/// does not match the mesh stamp.
std::vector<Grad4> reconstruct(const std::vector<State4>& field,
                               const PatchCache& cache, const MeshHierarchy& mesh);

/// Barth-Jespersen scalar limiter per component: reconstructed values at the
/// element's edge midpoints stay within the patch cell-average extrema.
/// Returns the limiter factors when `factors` is non-null.
void limit(const std::vector<State4>& field, const PatchCache& cache,
           const MeshHierarchy& mesh, std::vector<Grad4>& gradients,
           std::vector<std::array<double, 4>>* factors = nullptr);

/// Reconstructed value at point x from the cell average and (limited)
/// gradient of active element i.
State4 trace_at(const State4& u, const Grad4& g, Vec2 cell_center, Vec2 x);

}  // namespace goalfv
