// Mesh text format reader and legacy-VTK cell-data writer.
#pragma once

#include <string>
#include <vector>

#include "goalfv/mesh.hpp"

namespace goalfv {

struct MeshParseError : MeshError {
  using MeshError::MeshError;
};

/// Reads the workbench mesh text format:
///   NODES n        followed by n lines "x y"
///   TRIANGLES m    followed by m lines "i j k"   (0-based, CCW)
///   BOUNDARY b     followed by b lines "i j marker"  (1=wall, 2=farfield)
/// Whitespace-separated; '#' starts a comment. Parse errors carry the line
/// number; non-CCW triangles are fixed with a warning.
MeshHierarchy load_mesh(const std::string& path,
                        std::vector<std::string>* warnings = nullptr);

void save_mesh(const MeshHierarchy& mesh, const std::string& path);

/// Per-active-element output field, 1 or 4 components. Data is element-major
/// (value[e * components + c]).
struct CellField {
  std::string name;
  int components = 1;
  std::vector<double> data;
};

/// Legacy ASCII unstructured-grid file with one SCALARS block per component;
/// 4-component fields get suffixes _0.._3. Field lengths are validated
/// before anything is written.
void write_vtk(const MeshHierarchy& mesh, const std::vector<CellField>& fields,
               const std::string& path);

}  // namespace goalfv
