// Per-element feature extraction for the dual surrogate:
// (x, y, Ma, alpha, area, u0..u3, r0..r3), in exactly this order.
#pragma once

#include <array>
#include <vector>

#include "goalfv/mesh.hpp"

namespace goalfv {

inline constexpr int kFeatureCount = 13;
using FeatureRow = std::array<double, kFeatureCount>;

std::vector<FeatureRow> extract_features(const MeshHierarchy& mesh,
                                         const std::vector<State4>& u,
                                         const std::vector<State4>& r,
                                         const FlowConfig& cfg);

}  // namespace goalfv
