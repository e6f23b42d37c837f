#include "goalfv/mesh_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace goalfv {

namespace {

// line-numbered token stream over the mesh text format
class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  std::string next(const char* what) {
    while (true) {
      if (pos_ >= tokens_.size()) {
        if (!std::getline(in_, line_buf_)) {
          throw MeshParseError("unexpected end of file while reading " +
                               std::string(what) + " (line " +
                               std::to_string(line_no_) + ")");
        }
        ++line_no_;
        const auto hash = line_buf_.find('#');
        if (hash != std::string::npos) line_buf_.erase(hash);
        tokens_.clear();
        pos_ = 0;
        std::istringstream ls(line_buf_);
        std::string t;
        while (ls >> t) tokens_.push_back(t);
        continue;
      }
      return tokens_[pos_++];
    }
  }

  long integer(const char* what) {
    const std::string t = next(what);
    try {
      std::size_t used = 0;
      const long v = std::stol(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw MeshParseError("line " + std::to_string(line_no_) + ": expected integer " +
                           what + ", got '" + t + "'");
    }
  }

  double real(const char* what) {
    const std::string t = next(what);
    try {
      std::size_t used = 0;
      const double v = std::stod(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw MeshParseError("line " + std::to_string(line_no_) + ": expected number " +
                           what + ", got '" + t + "'");
    }
  }

  void keyword(const char* kw) {
    const std::string t = next(kw);
    if (t != kw)
      throw MeshParseError("line " + std::to_string(line_no_) + ": expected '" +
                           std::string(kw) + "', got '" + t + "'");
  }

  int line() const { return line_no_; }

 private:
  std::istream& in_;
  std::string line_buf_;
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
  int line_no_ = 0;
};

}  // namespace

MeshHierarchy load_mesh(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw MeshParseError("cannot open mesh file '" + path + "'");
  TokenReader tr(in);

  tr.keyword("NODES");
  const long nn = tr.integer("node count");
  if (nn < 3) throw MeshParseError("mesh needs at least 3 nodes");
  std::vector<MeshNode> nodes(nn);
  for (long i = 0; i < nn; ++i) {
    nodes[i].x = tr.real("node x");
    nodes[i].y = tr.real("node y");
  }

  tr.keyword("TRIANGLES");
  const long nt = tr.integer("triangle count");
  if (nt < 1) throw MeshParseError("mesh needs at least 1 triangle");
  std::vector<std::array<int, 3>> tris(nt);
  for (long t = 0; t < nt; ++t) {
    for (int k = 0; k < 3; ++k) {
      const long v = tr.integer("triangle node index");
      if (v < 0 || v >= nn)
        throw MeshParseError("line " + std::to_string(tr.line()) +
                             ": triangle node index " + std::to_string(v) +
                             " out of range [0," + std::to_string(nn - 1) + "]");
      tris[t][k] = static_cast<int>(v);
    }
  }

  tr.keyword("BOUNDARY");
  const long nb = tr.integer("boundary edge count");
  std::vector<BoundarySpec> boundary(nb);
  for (long b = 0; b < nb; ++b) {
    boundary[b].a = static_cast<int>(tr.integer("boundary node index"));
    boundary[b].b = static_cast<int>(tr.integer("boundary node index"));
    const long mk = tr.integer("boundary marker");
    if (mk == 1)
      boundary[b].marker = BoundaryMarker::wall;
    else if (mk == 2)
      boundary[b].marker = BoundaryMarker::farfield;
    else
      throw MeshParseError("line " + std::to_string(tr.line()) +
                           ": boundary marker must be 1 (wall) or 2 (farfield), got " +
                           std::to_string(mk));
  }

  return MeshHierarchy::build(std::move(nodes), std::move(tris), std::move(boundary),
                              warnings);
}

void save_mesh(const MeshHierarchy& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot open '" + path + "' for writing");
  out << "# goalfv mesh (active elements only)\n";
  out << "NODES " << mesh.nodes().size() << "\n";
  char buf[80];
  for (const auto& n : mesh.nodes()) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", n.x, n.y);
    out << buf;
  }
  out << "TRIANGLES " << mesh.active_count() << "\n";
  for (int id : mesh.active_ids()) {
    const auto& e = mesh.elements()[id];
    out << e.nodes[0] << " " << e.nodes[1] << " " << e.nodes[2] << "\n";
  }
  int nb = 0;
  for (const auto& ed : mesh.edges())
    if (ed.marker != BoundaryMarker::interior) ++nb;
  out << "BOUNDARY " << nb << "\n";
  for (const auto& ed : mesh.edges()) {
    if (ed.marker == BoundaryMarker::interior) continue;
    out << ed.nodes[0] << " " << ed.nodes[1] << " "
        << (ed.marker == BoundaryMarker::wall ? 1 : 2) << "\n";
  }
  if (!out) throw MeshError("write failure on '" + path + "'");
}

void write_vtk(const MeshHierarchy& mesh, const std::vector<CellField>& fields,
               const std::string& path) {
  const int nc = mesh.active_count();
  for (const auto& f : fields) {
    if (f.components != 1 && f.components != 4)
      throw MeshError("VTK field '" + f.name + "' must have 1 or 4 components");
    if (static_cast<int>(f.data.size()) != nc * f.components)
      throw MeshError("VTK field '" + f.name + "' length " +
                      std::to_string(f.data.size()) + " does not match " +
                      std::to_string(nc) + " active elements");
  }

  std::ofstream out(path);
  if (!out) throw MeshError("cannot open '" + path + "' for writing");
  out << "# vtk DataFile Version 3.0\n";
  out << "goalfv fields\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.nodes().size() << " double\n";
  char buf[96];
  for (const auto& n : mesh.nodes()) {
    std::snprintf(buf, sizeof(buf), "%.12g %.12g 0\n", n.x, n.y);
    out << buf;
  }
  out << "CELLS " << nc << " " << 4 * nc << "\n";
  for (int id : mesh.active_ids()) {
    const auto& e = mesh.elements()[id];
    out << "3 " << e.nodes[0] << " " << e.nodes[1] << " " << e.nodes[2] << "\n";
  }
  out << "CELL_TYPES " << nc << "\n";
  for (int i = 0; i < nc; ++i) out << "5\n";

  if (!fields.empty()) {
    out << "CELL_DATA " << nc << "\n";
    for (const auto& f : fields) {
      for (int c = 0; c < f.components; ++c) {
        const std::string name =
            f.components == 1 ? f.name : f.name + "_" + std::to_string(c);
        out << "SCALARS " << name << " double 1\n";
        out << "LOOKUP_TABLE default\n";
        for (int e = 0; e < nc; ++e) {
          std::snprintf(buf, sizeof(buf), "%.12g\n", f.data[e * f.components + c]);
          out << buf;
        }
      }
    }
  }
  if (!out) throw MeshError("write failure on '" + path + "'");
}

}  // namespace goalfv
