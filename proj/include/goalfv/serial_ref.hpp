// Plain-loop reference implementations of the OpenMP kernels. Unit tests
// compare the parallel kernels against these bitwise; the bench harness times
// them side by side.
#pragma once

#include "goalfv/primal.hpp"
#include "goalfv/reconstruct.hpp"

namespace goalfv::serial {

std::vector<Grad4> reconstruct(const std::vector<State4>& field,
                               const PatchCache& cache, const MeshHierarchy& mesh);

void limit(const std::vector<State4>& field, const PatchCache& cache,
           const MeshHierarchy& mesh, std::vector<Grad4>& gradients);

ResidualReport assemble_residual(const std::vector<State4>& u,
                                 const MeshHierarchy& mesh, const PatchCache& cache,
                                 const FlowConfig& cfg, const ResidualOptions& opts);

/// u += scale * du, the cell-average update kernel.
void cell_update(std::vector<State4>& u, const std::vector<State4>& du, double scale);

}  // namespace goalfv::serial

namespace goalfv {
/// Parallel counterpart of serial::cell_update.
void cell_update(std::vector<State4>& u, const std::vector<State4>& du, double scale);
}  // namespace goalfv
