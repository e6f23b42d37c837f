#include "goalfv/features.hpp"

namespace goalfv {

std::vector<FeatureRow> extract_features(const MeshHierarchy& mesh,
                                         const std::vector<State4>& u,
                                         const std::vector<State4>& r,
                                         const FlowConfig& cfg) {
  const int n = mesh.active_count();
  if (static_cast<int>(u.size()) != n || static_cast<int>(r.size()) != n)
    throw MeshError("feature extraction: field lengths do not match active count");
  std::vector<FeatureRow> rows(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const Vec2 b = mesh.barycenter_by_index(i);
    FeatureRow& f = rows[i];
    f[0] = b.x;
    f[1] = b.y;
    f[2] = cfg.mach;
    f[3] = cfg.alpha_deg;
    f[4] = mesh.area_by_index(i);
    for (int c = 0; c < 4; ++c) f[5 + c] = u[i][c];
    for (int c = 0; c < 4; ++c) f[9 + c] = r[i][c];
  }
  return rows;
}

}  // namespace goalfv
