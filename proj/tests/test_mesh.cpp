// Mesh loading, O-mesh generation, red/green refinement, coarsening,
// geometry queries, and the VTK writer.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "goalfv/mesh.hpp"
#include "goalfv/mesh_io.hpp"

using namespace goalfv;
namespace fs = std::filesystem;

namespace {

fs::path tmp_file(const std::string& name) {
  const fs::path dir = fs::path("test_scratch");
  fs::create_directories(dir);
  return dir / name;
}

MeshHierarchy square_mesh() {
  // unit square split along the diagonal
  return MeshHierarchy::build(
      {{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}},
      {{0, 1, BoundaryMarker::wall},
       {1, 2, BoundaryMarker::farfield},
       {2, 3, BoundaryMarker::farfield},
       {3, 0, BoundaryMarker::farfield}});
}

// audit: every node lying on an active edge is a corner of all active
// elements incident to that edge (the mesh rebuild throws on hanging nodes;
// this re-checks geometrically)
void audit_no_hanging_nodes(const MeshHierarchy& m) {
  for (const auto& ed : m.edges()) {
    const auto& a = m.nodes()[ed.nodes[0]];
    const auto& b = m.nodes()[ed.nodes[1]];
    for (std::size_t ni = 0; ni < m.nodes().size(); ++ni) {
      const auto& p = m.nodes()[ni];
      if (static_cast<int>(ni) == ed.nodes[0] || static_cast<int>(ni) == ed.nodes[1])
        continue;
      const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
      const double t = ((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) /
                       (ed.length * ed.length);
      const bool on_open_segment =
          std::abs(cross) < 1e-12 * ed.length && t > 1e-9 && t < 1.0 - 1e-9;
      // a node strictly interior to an active edge would be hanging; it must
      // not be a corner of any active element
      if (on_open_segment) {
        bool used = false;
        for (int id : m.active_ids())
          for (int k : m.elements()[id].nodes)
            if (k == static_cast<int>(ni)) used = true;
        CHECK_FALSE(used);
      }
    }
  }
}

}  // namespace

TEST_CASE("load smallest valid mesh") {
  const auto p = tmp_file("single.mesh");
  std::ofstream(p) << "# smallest valid mesh\n"
                      "NODES 3\n0 0\n1 0\n0 1\n"
                      "TRIANGLES 1\n0 1 2\n"
                      "BOUNDARY 3\n0 1 1\n1 2 2\n2 0 2\n";
  const MeshHierarchy m = load_mesh(p.string());
  CHECK(m.active_count() == 1);
  CHECK(m.edges().size() == 3);
  CHECK(m.count_wall_edges() == 1);
  m.validate();
}

TEST_CASE("load unit square") {
  const auto p = tmp_file("square.mesh");
  std::ofstream(p) << "NODES 4\n0 0\n1 0\n1 1\n0 1\n"
                      "TRIANGLES 2\n0 1 2\n0 2 3\n"
                      "BOUNDARY 4\n0 1 1\n1 2 2\n2 3 2\n3 0 2\n";
  const MeshHierarchy m = load_mesh(p.string());
  CHECK(m.active_count() == 2);
  int interior = 0, bnd = 0;
  for (const auto& e : m.edges())
    (e.marker == BoundaryMarker::interior ? interior : bnd)++;
  CHECK(interior == 1);
  CHECK(bnd == 4);
}

TEST_CASE("parse error names the line") {
  const auto p = tmp_file("bad.mesh");
  std::ofstream(p) << "NODES 3\n0 0\n1 0\n0 1\n"
                      "TRIANGLES 1\n0 1 7\n"
                      "BOUNDARY 3\n0 1 1\n1 2 2\n2 0 2\n";
  try {
    load_mesh(p.string());
    FAIL("expected parse error");
  } catch (const MeshParseError& e) {
    CHECK(std::string(e.what()).find("line 6") != std::string::npos);
    CHECK(std::string(e.what()).find("out of range") != std::string::npos);
  }
}

TEST_CASE("non-CCW triangle fixed with warning") {
  const auto p = tmp_file("cw.mesh");
  std::ofstream(p) << "NODES 3\n0 0\n1 0\n0 1\n"
                      "TRIANGLES 1\n0 2 1\n"
                      "BOUNDARY 3\n0 1 1\n1 2 2\n2 0 2\n";
  std::vector<std::string> warnings;
  const MeshHierarchy m = load_mesh(p.string(), &warnings);
  CHECK(warnings.size() == 1);
  CHECK(m.area(0) == doctest::Approx(0.5));
}

TEST_CASE("duplicate edge is a hard error") {
  CHECK_THROWS_AS(MeshHierarchy::build({{0, 0}, {1, 0}, {0, 1}, {1, 1}, {-1, 1}},
                                       {{0, 1, 2}, {1, 3, 2}, {0, 2, 4}, {0, 1, 2}},
                                       {}),
                  MeshError);
}

TEST_CASE("naca omesh generation") {
  const MeshHierarchy m = generate_naca_omesh("0012", 64, 16, 20.0);
  CHECK(m.active_count() == 2 * 64 * 16);
  CHECK(m.count_wall_edges() == 64);
  m.validate();

  // wall edges are chords of the analytic profile
  const NacaCurve& curve = m.curve();
  for (const auto& e : m.edges()) {
    if (e.marker != BoundaryMarker::wall) continue;
    const auto& a = m.nodes()[e.nodes[0]];
    const auto& b = m.nodes()[e.nodes[1]];
    CHECK(curve.distance({a.x, a.y}) < 1e-9);
    const Vec2 mid = {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
    CHECK(curve.distance(mid) < 1e-3);
  }

  // generated mesh is exactly mirror-symmetric about y = 0
  std::set<std::pair<double, double>> pts;
  for (const auto& n : m.nodes()) pts.insert({n.x, n.y});
  for (const auto& n : m.nodes()) CHECK(pts.count({n.x, -n.y}) == 1);
}

TEST_CASE("naca 0000 collapses to a flat plate") {
  const MeshHierarchy m = generate_naca_omesh("0000", 32, 6, 15.0);
  for (const auto& e : m.edges()) {
    if (e.marker != BoundaryMarker::wall) continue;
    CHECK(std::abs(m.nodes()[e.nodes[0]].y) <= 1e-14);
    CHECK(std::abs(m.nodes()[e.nodes[1]].y) <= 1e-14);
  }
}

TEST_CASE("omesh precondition violations") {
  CHECK_THROWS_AS(generate_naca_omesh("0012", 15, 8, 20.0), MeshError);
  CHECK_THROWS_AS(generate_naca_omesh("0012", 14, 8, 20.0), MeshError);
  CHECK_THROWS_AS(generate_naca_omesh("0012", 32, 3, 20.0), MeshError);
  CHECK_THROWS_AS(generate_naca_omesh("0012", 32, 8, 5.0), MeshError);
  CHECK_THROWS_AS(generate_naca_omesh("001", 32, 8, 20.0), std::invalid_argument);
}

TEST_CASE("uniform red refinement multiplies by 4") {
  MeshHierarchy m = square_mesh();
  const RefineReport rep = m.refine(std::vector<std::uint8_t>(2, 1));
  CHECK(rep.red_splits == 2);
  CHECK(rep.green_splits == 0);
  CHECK(m.active_count() == 8);
  m.validate();

  MeshHierarchy g = generate_naca_omesh("0012", 16, 4, 12.0);
  const int n0 = g.active_count();
  g.uniform_refine(2);
  CHECK(g.active_count() == n0 * 16);
  g.validate();
  CHECK_THROWS_AS(g.uniform_refine(0), MeshError);
}

TEST_CASE("uniform refine arithmetic matches the reference protocol") {
  // 58,176 * 4^4 = 930,816: the 4^times growth law at desk scale
  MeshHierarchy m = square_mesh();
  const int n0 = m.active_count();
  m.uniform_refine(3);
  CHECK(m.active_count() == n0 * 64);
  CHECK(58176 * (1 << 8) / 16 == 930816);
}

TEST_CASE("single-flag refinement closes with a green split") {
  MeshHierarchy m = square_mesh();
  std::vector<std::uint8_t> flags = {1, 0};
  const RefineReport rep = m.refine(flags);
  CHECK(rep.red_splits == 1);
  CHECK(rep.green_splits == 1);
  CHECK(m.active_count() == 6);  // 4 red children + 2 green halves
  m.validate();
  audit_no_hanging_nodes(m);

  // refining again in the same region first re-merges the green pair
  std::vector<std::uint8_t> all(m.active_count(), 1);
  const RefineReport rep2 = m.refine(all);
  CHECK(rep2.green_merges == 1);
  m.validate();
  audit_no_hanging_nodes(m);
}

TEST_CASE("refine then coarsen restores the original actives") {
  MeshHierarchy m = square_mesh();
  m.refine({1, 0});
  CHECK(m.active_count() == 6);
  const CoarsenReport rep = m.coarsen(std::vector<std::uint8_t>(6, 1));
  CHECK(rep.merges == 2);
  CHECK(m.active_count() == 2);
  std::set<int> ids(m.active_ids().begin(), m.active_ids().end());
  CHECK(ids == std::set<int>{0, 1});
  m.validate();
}

TEST_CASE("coarsen rules") {
  MeshHierarchy m = square_mesh();
  m.refine({1, 1});
  CHECK(m.active_count() == 8);

  // 3 of 4 siblings flagged: no merge
  std::vector<std::uint8_t> flags(8, 0);
  const auto& kids = m.elements()[0].children;
  for (int c = 0; c < 3; ++c) flags[m.active_index_of(kids[c])] = 1;
  const CoarsenReport r1 = m.coarsen(flags);
  CHECK(r1.merges == 0);
  CHECK(r1.ignored == 3);
  CHECK(m.active_count() == 8);

  // all siblings of both parents flagged: both merge
  const CoarsenReport r2 = m.coarsen(std::vector<std::uint8_t>(8, 1));
  CHECK(r2.merges == 2);
  CHECK(m.active_count() == 2);

  // level-0 coarsening is a no-op
  const CoarsenReport r3 = m.coarsen(std::vector<std::uint8_t>(2, 1));
  CHECK(r3.merges == 0);
  CHECK(r3.ignored == 2);
  CHECK(m.active_count() == 2);
}

TEST_CASE("partial coarsening skips merges that would hang") {
  MeshHierarchy m = square_mesh();
  m.refine({1, 1});  // 8 elements, conforming, both parents refined
  // flag only the children of parent 0: merging it would hang the midpoint
  // of the shared diagonal, which parent 1's children still use
  std::vector<std::uint8_t> flags(8, 0);
  for (int c = 0; c < 4; ++c) flags[m.active_index_of(m.elements()[0].children[c])] = 1;
  const CoarsenReport rep = m.coarsen(flags);
  CHECK(rep.merges == 0);
  CHECK(rep.ignored == 4);
  m.validate();
}

TEST_CASE("tiling is preserved through a random refine/coarsen history") {
  MeshHierarchy m = generate_naca_omesh("0012", 16, 4, 12.0);
  const double area0 = m.boundary_enclosed_area();
  std::mt19937_64 rng(7);
  for (int round = 0; round < 4; ++round) {
    std::vector<std::uint8_t> flags(m.active_count());
    std::bernoulli_distribution bern(0.25);
    for (auto& f : flags) f = bern(rng);
    m.refine(flags);
    m.validate();
    std::vector<std::uint8_t> cf(m.active_count());
    for (auto& f : cf) f = bern(rng);
    m.coarsen(cf);
    m.validate();
  }
  // straight-sided meshes preserve the level-0 area; the wall here is curved
  // so compare against the current boundary polygon
  CHECK(m.total_active_area() ==
        doctest::Approx(m.boundary_enclosed_area()).epsilon(1e-12));
  CHECK(m.boundary_enclosed_area() == doctest::Approx(area0).epsilon(1e-2));
}

TEST_CASE("children area sums and projection") {
  MeshHierarchy m = generate_naca_omesh("0012", 32, 8, 15.0);
  m.uniform_refine(1);
  // interior (straight) parents: children areas sum to the parent area
  for (int id = 0; id < 2 * 32 * 8; ++id) {
    const auto& e = m.elements()[id];
    REQUIRE(e.n_children == 4);
    bool wall_parent = false;
    for (int c = 0; c < 4; ++c)
      for (int k : m.elements()[e.children[c]].nodes)
        if (m.wall_node_parameter_known(k)) wall_parent = true;
    if (wall_parent) continue;  // projected midpoints move off the chord
    double kid_sum = 0.0;
    for (int c = 0; c < 4; ++c) kid_sum += m.area(e.children[c]);
    const auto& n = m.nodes();
    const auto& t = e.nodes;
    const double parent_area =
        0.5 * std::abs((n[t[1]].x - n[t[0]].x) * (n[t[2]].y - n[t[0]].y) -
                       (n[t[2]].x - n[t[0]].x) * (n[t[1]].y - n[t[0]].y));
    CHECK(kid_sum == doctest::Approx(parent_area).epsilon(1e-12));
  }
  // refined wall nodes land exactly on the analytic curve
  for (const auto& e : m.edges()) {
    if (e.marker != BoundaryMarker::wall) continue;
    CHECK(m.curve().distance({m.nodes()[e.nodes[0]].x, m.nodes()[e.nodes[0]].y}) < 1e-9);
  }
}

TEST_CASE("geometry queries") {
  MeshHierarchy m = MeshHierarchy::build(
      {{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}},
      {{0, 1, BoundaryMarker::wall}, {1, 2, BoundaryMarker::farfield}, {2, 0, BoundaryMarker::farfield}});
  const Vec2 b = m.barycenter(0);
  CHECK(b.x == doctest::Approx(1.0 / 3));
  CHECK(b.y == doctest::Approx(1.0 / 3));
  CHECK(m.area(0) == doctest::Approx(0.5));

  // translation invariance
  MeshHierarchy t = MeshHierarchy::build(
      {{5, -2}, {6, -2}, {5, -1}}, {{0, 1, 2}},
      {{0, 1, BoundaryMarker::wall}, {1, 2, BoundaryMarker::farfield}, {2, 0, BoundaryMarker::farfield}});
  CHECK(t.area(0) == doctest::Approx(0.5));
  CHECK(t.barycenter(0).x == doctest::Approx(5 + 1.0 / 3));

  m.refine({1});
  CHECK_THROWS_AS(m.area(0), MeshError);  // parent no longer active
  double kid_sum = 0;
  for (int id : m.active_ids()) kid_sum += m.area(id);
  CHECK(kid_sum == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("interior edge normals oppose") {
  MeshHierarchy m = generate_naca_omesh("0012", 16, 4, 12.0);
  for (std::size_t ai = 0; ai < m.active_ids().size(); ++ai) {
    const int id = m.active_ids()[ai];
    for (int k = 0; k < 3; ++k) {
      const Edge& e = m.edges()[m.element_edges(static_cast<int>(ai))[k]];
      // outward normal as seen from this element
      const double sign = e.left == id ? 1.0 : -1.0;
      const Vec2 out = {sign * e.normal.x, sign * e.normal.y};
      const Vec2 bc = m.barycenter(id);
      const auto& a = m.nodes()[e.nodes[0]];
      const auto& b = m.nodes()[e.nodes[1]];
      const Vec2 mid = {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
      CHECK(dot(out, mid - bc) > 0.0);  // points away from the element
    }
  }
}

TEST_CASE("vtk writer") {
  const auto p = tmp_file("one.vtk");
  MeshHierarchy m = MeshHierarchy::build(
      {{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}},
      {{0, 1, BoundaryMarker::wall}, {1, 2, BoundaryMarker::farfield}, {2, 0, BoundaryMarker::farfield}});
  write_vtk(m, {{"rho", 1, {1.0}}, {"u", 4, {1.0, 0.5, 0.25, 2.0}}}, p.string());
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  CHECK(text.find("CELLS 1") != std::string::npos);
  CHECK(text.find("SCALARS rho") != std::string::npos);
  for (int c = 0; c < 4; ++c)
    CHECK(text.find("SCALARS u_" + std::to_string(c)) != std::string::npos);

  const auto bad = tmp_file("bad.vtk");
  std::error_code ec;
  fs::remove(bad, ec);
  CHECK_THROWS_AS(write_vtk(m, {{"rho", 1, {1.0, 2.0}}}, bad.string()), MeshError);
  CHECK_FALSE(fs::exists(bad));  // nothing written on length mismatch
}

TEST_CASE("mesh save/load round trip") {
  MeshHierarchy m = generate_naca_omesh("0012", 16, 4, 12.0);
  m.refine(std::vector<std::uint8_t>(m.active_count(), 1));
  const auto p = tmp_file("roundtrip.mesh");
  save_mesh(m, p.string());
  const MeshHierarchy back = load_mesh(p.string());
  CHECK(back.active_count() == m.active_count());
  CHECK(back.total_active_area() == doctest::Approx(m.total_active_area()).epsilon(1e-12));
}

TEST_CASE("level cap") {
  MeshHierarchy m = square_mesh();
  m.set_level_cap(2);
  m.refine({1, 1});
  m.refine(std::vector<std::uint8_t>(8, 1));
  CHECK_THROWS_AS(m.refine(std::vector<std::uint8_t>(32, 1)), MeshError);
}
