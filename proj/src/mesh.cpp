#include "goalfv/mesh.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <unordered_set>

namespace goalfv {

namespace {

double signed_area(const MeshNode& a, const MeshNode& b, const MeshNode& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffu;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

std::uint64_t MeshHierarchy::edge_key(int a, int b) {
  const std::uint64_t lo = static_cast<std::uint32_t>(std::min(a, b));
  const std::uint64_t hi = static_cast<std::uint32_t>(std::max(a, b));
  return (hi << 32) | lo;
}

MeshHierarchy MeshHierarchy::build(std::vector<MeshNode> nodes,
                                   std::vector<std::array<int, 3>> triangles,
                                   std::vector<BoundarySpec> boundary,
                                   std::vector<std::string>* warnings) {
  MeshHierarchy m;
  m.nodes_ = std::move(nodes);
  const int nn = static_cast<int>(m.nodes_.size());
  for (const auto& n : m.nodes_) {
    if (!std::isfinite(n.x) || !std::isfinite(n.y))
      throw MeshError("non-finite node coordinate");
  }

  m.elements_.reserve(triangles.size());
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    auto tri = triangles[t];
    for (int k : tri) {
      if (k < 0 || k >= nn)
        throw MeshError("triangle " + std::to_string(t) +
                        " references node index out of range: " + std::to_string(k));
    }
    double a = signed_area(m.nodes_[tri[0]], m.nodes_[tri[1]], m.nodes_[tri[2]]);
    if (a == 0.0)
      throw MeshError("triangle " + std::to_string(t) + " has zero area");
    if (a < 0.0) {
      std::swap(tri[1], tri[2]);
      if (warnings)
        warnings->push_back("triangle " + std::to_string(t) +
                            " was not counter-clockwise; reordered");
    }
    Element e;
    e.nodes = tri;
    m.elements_.push_back(e);
  }

  // edge usage accounting
  std::unordered_map<std::uint64_t, int> use_count;
  for (const auto& e : m.elements_) {
    for (int k = 0; k < 3; ++k) {
      const std::uint64_t key = edge_key(e.nodes[k], e.nodes[(k + 1) % 3]);
      if (++use_count[key] > 2) throw MeshError("duplicate edge: an edge is shared by more than two triangles");
    }
  }
  for (const auto& b : boundary) {
    if (b.a < 0 || b.a >= nn || b.b < 0 || b.b >= nn)
      throw MeshError("boundary edge references node index out of range");
    const std::uint64_t key = edge_key(b.a, b.b);
    auto it = use_count.find(key);
    if (it == use_count.end())
      throw MeshError("boundary edge (" + std::to_string(b.a) + "," +
                      std::to_string(b.b) + ") is not an edge of any triangle");
    if (it->second == 2)
      throw MeshError("boundary edge (" + std::to_string(b.a) + "," +
                      std::to_string(b.b) + ") is interior to the mesh");
    if (m.boundary_marker_.count(key))
      throw MeshError("duplicate boundary edge (" + std::to_string(b.a) + "," +
                      std::to_string(b.b) + ")");
    m.boundary_marker_[key] = b.marker;
  }
  for (const auto& [key, cnt] : use_count) {
    if (cnt == 1 && !m.boundary_marker_.count(key))
      throw MeshError("mesh has an unmatched interior edge (hole or missing boundary declaration)");
  }

  m.rebuild_topology();
  return m;
}

int MeshHierarchy::active_index_of(int element_id) const {
  auto it = active_index_.find(element_id);
  if (it == active_index_.end())
    throw MeshError("element " + std::to_string(element_id) + " is not active");
  return it->second;
}

Vec2 MeshHierarchy::barycenter(int element_id) const {
  if (element_id < 0 || element_id >= static_cast<int>(elements_.size()) ||
      !elements_[element_id].is_leaf())
    throw MeshError("geometry query on inactive element " + std::to_string(element_id));
  const auto& e = elements_[element_id];
  const auto& a = nodes_[e.nodes[0]];
  const auto& b = nodes_[e.nodes[1]];
  const auto& c = nodes_[e.nodes[2]];
  return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

double MeshHierarchy::area_raw(int element_id) const {
  const auto& e = elements_[element_id];
  return signed_area(nodes_[e.nodes[0]], nodes_[e.nodes[1]], nodes_[e.nodes[2]]);
}

double MeshHierarchy::area(int element_id) const {
  if (element_id < 0 || element_id >= static_cast<int>(elements_.size()) ||
      !elements_[element_id].is_leaf())
    throw MeshError("geometry query on inactive element " + std::to_string(element_id));
  return area_raw(element_id);
}

double MeshHierarchy::total_active_area() const {
  double s = 0.0;
  for (int id : active_) s += area_raw(id);
  return s;
}

double MeshHierarchy::boundary_enclosed_area() const {
  double s = 0.0;
  for (const auto& e : edges_) {
    if (e.marker == BoundaryMarker::interior) continue;
    const auto& a = nodes_[e.nodes[0]];
    const auto& b = nodes_[e.nodes[1]];
    s += 0.5 * (a.x * b.y - b.x * a.y);
  }
  return s;
}

int MeshHierarchy::count_wall_edges() const {
  int n = 0;
  for (const auto& e : edges_)
    if (e.marker == BoundaryMarker::wall) ++n;
  return n;
}

std::uint64_t MeshHierarchy::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& n : nodes_) {
    h = fnv1a(h, std::bit_cast<std::uint64_t>(n.x));
    h = fnv1a(h, std::bit_cast<std::uint64_t>(n.y));
  }
  for (int id : active_) {
    const auto& e = elements_[id];
    for (int k : e.nodes) h = fnv1a(h, static_cast<std::uint64_t>(k));
  }
  for (const auto& e : edges_) {
    h = fnv1a(h, static_cast<std::uint64_t>(e.marker));
  }
  return h;
}

int MeshHierarchy::midpoint_node(int a, int b) {
  const std::uint64_t key = edge_key(a, b);
  auto it = edge_midpoint_.find(key);
  if (it != edge_midpoint_.end()) return it->second;

  const int m = static_cast<int>(nodes_.size());
  auto bit = boundary_marker_.find(key);
  const bool on_wall = bit != boundary_marker_.end() && bit->second == BoundaryMarker::wall;

  bool projected = false;
  if (on_wall && curve_) {
    auto pa = wall_param_.find(a);
    auto pb = wall_param_.find(b);
    if (pa != wall_param_.end() && pb != wall_param_.end()) {
      const double s = curve_param_midpoint(pa->second, pb->second);
      const Vec2 p = curve_->point(s);
      nodes_.push_back({p.x, p.y});
      wall_param_[m] = s;
      projected = true;
    }
  }
  if (!projected) {
    nodes_.push_back({0.5 * (nodes_[a].x + nodes_[b].x),
                      0.5 * (nodes_[a].y + nodes_[b].y)});
  }
  if (bit != boundary_marker_.end()) {
    const BoundaryMarker mk = bit->second;
    boundary_marker_[edge_key(a, m)] = mk;
    boundary_marker_[edge_key(m, b)] = mk;
  }
  edge_midpoint_[key] = m;
  return m;
}

void MeshHierarchy::split_red(int element_id, RefineReport& rep) {
  if (elements_[element_id].level + 1 > level_cap_)
    throw MeshError("refinement level cap (" + std::to_string(level_cap_) +
                    ") exceeded at element " + std::to_string(element_id));
  const std::array<int, 3> n = elements_[element_id].nodes;
  const int level = elements_[element_id].level;
  const int m01 = midpoint_node(n[0], n[1]);
  const int m12 = midpoint_node(n[1], n[2]);
  const int m20 = midpoint_node(n[2], n[0]);

  const std::array<std::array<int, 3>, 4> kids = {{{n[0], m01, m20},
                                                   {m01, n[1], m12},
                                                   {m20, m12, n[2]},
                                                   {m01, m12, m20}}};
  const int base = static_cast<int>(elements_.size());
  for (int c = 0; c < 4; ++c) {
    Element child;
    child.nodes = kids[c];
    child.parent = element_id;
    child.level = level + 1;
    elements_.push_back(child);
    elements_[element_id].children[c] = base + c;
  }
  elements_[element_id].n_children = 4;
  ++rep.red_splits;
}

void MeshHierarchy::split_green(int element_id, int hanging_edge_local,
                                RefineReport& rep) {
  if (elements_[element_id].level + 1 > level_cap_)
    throw MeshError("refinement level cap (" + std::to_string(level_cap_) +
                    ") exceeded during closure at element " + std::to_string(element_id));
  const std::array<int, 3> n = elements_[element_id].nodes;
  const int level = elements_[element_id].level;
  const int a = n[hanging_edge_local];
  const int b = n[(hanging_edge_local + 1) % 3];
  const int c = n[(hanging_edge_local + 2) % 3];
  const int m = edge_midpoint_.at(edge_key(a, b));

  const std::array<std::array<int, 3>, 2> kids = {{{a, m, c}, {m, b, c}}};
  const int base = static_cast<int>(elements_.size());
  for (int k = 0; k < 2; ++k) {
    Element child;
    child.nodes = kids[k];
    child.parent = element_id;
    child.level = level + 1;
    child.green = true;
    elements_.push_back(child);
    elements_[element_id].children[k] = base + k;
  }
  elements_[element_id].n_children = 2;
  ++rep.green_splits;
}

// 3-child closure of an element hung on two edges; uses only the existing
// midpoints, so it never propagates new hangs to neighbors
void MeshHierarchy::split_blue(int element_id, int unhung_edge_local,
                               RefineReport& rep) {
  if (elements_[element_id].level + 1 > level_cap_)
    throw MeshError("refinement level cap (" + std::to_string(level_cap_) +
                    ") exceeded during closure at element " + std::to_string(element_id));
  const std::array<int, 3> n = elements_[element_id].nodes;
  const int level = elements_[element_id].level;
  // relabel so the hung edges are (a,b) and (b,c)
  const int a = n[(unhung_edge_local + 1) % 3];
  const int b = n[(unhung_edge_local + 2) % 3];
  const int c = n[unhung_edge_local];
  const int m1 = edge_midpoint_.at(edge_key(a, b));
  const int m2 = edge_midpoint_.at(edge_key(b, c));

  // split the leftover quad (a, m1, m2, c) along its shorter diagonal
  const auto d2 = [&](int p, int q) {
    const double dx = nodes_[p].x - nodes_[q].x;
    const double dy = nodes_[p].y - nodes_[q].y;
    return dx * dx + dy * dy;
  };
  std::array<std::array<int, 3>, 3> kids;
  kids[0] = {m1, b, m2};
  if (d2(a, m2) <= d2(m1, c)) {
    kids[1] = {a, m1, m2};
    kids[2] = {a, m2, c};
  } else {
    kids[1] = {a, m1, c};
    kids[2] = {m1, m2, c};
  }
  const int base = static_cast<int>(elements_.size());
  for (int k = 0; k < 3; ++k) {
    Element child;
    child.nodes = kids[k];
    child.parent = element_id;
    child.level = level + 1;
    child.green = true;
    elements_.push_back(child);
    elements_[element_id].children[k] = base + k;
  }
  elements_[element_id].n_children = 3;
  ++rep.blue_splits;
}

void MeshHierarchy::merge_children(int parent_id) {
  Element& p = elements_[parent_id];
  for (int c = 0; c < p.n_children; ++c) {
    elements_[p.children[c]].retired = true;
    p.children[c] = -1;
  }
  p.n_children = 0;
}

RefineReport MeshHierarchy::refine(const std::vector<std::uint8_t>& flags) {
  if (static_cast<int>(flags.size()) != active_count())
    throw MeshError("refine flags length (" + std::to_string(flags.size()) +
                    ") != active element count (" + std::to_string(active_count()) + ")");
  RefineReport rep;

  std::unordered_set<int> want;
  for (int i = 0; i < active_count(); ++i)
    if (flags[i]) want.insert(active_[i]);

  // Re-merge leaf closure families (green pairs and blue triples) before any
  // refinement; a flag on a closure child becomes a red flag on its parent.
  std::vector<int> green_parents;
  for (int id = 0; id < static_cast<int>(elements_.size()); ++id) {
    const Element& e = elements_[id];
    if (e.retired || e.n_children == 0 || e.n_children == 4) continue;
    bool all_leaves = true;
    for (int c = 0; c < e.n_children; ++c)
      if (!elements_[e.children[c]].is_leaf()) all_leaves = false;
    if (all_leaves) green_parents.push_back(id);
  }
  for (int p : green_parents) {
    const Element& e = elements_[p];
    bool flagged = false;
    CoarsenMerge mg;
    mg.parent = p;
    mg.count = e.n_children;
    for (int c = 0; c < mg.count; ++c) {
      if (want.count(e.children[c])) flagged = true;
      want.erase(e.children[c]);
      mg.children[c] = e.children[c];
      mg.child_areas[c] = area_raw(e.children[c]);
    }
    rep.green_merge_list.push_back(mg);
    merge_children(p);
    if (flagged) want.insert(p);
    ++rep.green_merges;
  }

  std::unordered_set<int> red = std::move(want);

  // hanging-midpoint census for one element against the current leaf corners;
  // `deep` flags a neighbor subdivision more than one level finer, which a
  // single bisection cannot close
  struct Hang {
    int count = 0;
    int local = -1;
    bool deep = false;
  };
  const auto hang_of = [&](const Element& e, const std::vector<char>& corner) {
    Hang h;
    for (int k = 0; k < 3; ++k) {
      const int a = e.nodes[k];
      const int b = e.nodes[(k + 1) % 3];
      auto it = edge_midpoint_.find(edge_key(a, b));
      if (it == edge_midpoint_.end() || !corner[it->second]) continue;
      ++h.count;
      h.local = k;
      const int m = it->second;
      for (const auto& [x, y] : {std::pair{a, m}, std::pair{m, b}}) {
        auto jt = edge_midpoint_.find(edge_key(x, y));
        if (jt != edge_midpoint_.end() && corner[jt->second]) h.deep = true;
      }
    }
    return h;
  };
  const auto leaf_corners = [&]() {
    std::vector<char> corner(nodes_.size(), 0);
    for (const auto& e : elements_) {
      if (!e.is_leaf()) continue;
      for (int k : e.nodes) corner[k] = 1;
    }
    return corner;
  };

  // Closure fixpoint: split reds, then promote any element with >= 2 hanging
  // midpoints (or a deep hang) to red; repeat until stable.
  std::vector<int> pending(red.begin(), red.end());
  std::sort(pending.begin(), pending.end());
  while (true) {
    for (int id : pending) split_red(id, rep);
    pending.clear();

    const std::vector<char> corner = leaf_corners();
    for (int id = 0; id < static_cast<int>(elements_.size()); ++id) {
      const Element& e = elements_[id];
      if (!e.is_leaf() || red.count(id)) continue;
      const Hang h = hang_of(e, corner);
      if (h.count >= 3 || h.deep) {
        red.insert(id);
        pending.push_back(id);
      }
    }
    if (pending.empty()) break;
    std::sort(pending.begin(), pending.end());
  }

  // Closure of the remaining shallow hangs: bisection for single hangs, a
  // 3-child split for double hangs.
  {
    const std::vector<char> corner = leaf_corners();
    std::vector<std::pair<int, int>> greens;  // (element, local edge)
    std::vector<std::pair<int, int>> blues;   // (element, unhung local edge)
    for (int id = 0; id < static_cast<int>(elements_.size()); ++id) {
      const Element& e = elements_[id];
      if (!e.is_leaf()) continue;
      const Hang h = hang_of(e, corner);
      if (h.count == 1) {
        greens.emplace_back(id, h.local);
      } else if (h.count == 2) {
        int unhung = -1;
        for (int k = 0; k < 3; ++k) {
          auto it = edge_midpoint_.find(edge_key(e.nodes[k], e.nodes[(k + 1) % 3]));
          if (it == edge_midpoint_.end() || !corner[it->second]) unhung = k;
        }
        blues.emplace_back(id, unhung);
      }
    }
    for (auto [id, local] : greens) split_green(id, local, rep);
    for (auto [id, local] : blues) split_blue(id, local, rep);
  }

  rebuild_topology();
  ++stamp_;
  return rep;
}

CoarsenReport MeshHierarchy::coarsen(const std::vector<std::uint8_t>& flags) {
  if (static_cast<int>(flags.size()) != active_count())
    throw MeshError("coarsen flags length != active element count");
  CoarsenReport rep;

  std::unordered_set<int> flagged;
  for (int i = 0; i < active_count(); ++i)
    if (flags[i]) flagged.insert(active_[i]);

  // candidate parents: every child is an active leaf and flagged
  std::vector<int> candidates;
  for (int id = 0; id < static_cast<int>(elements_.size()); ++id) {
    const Element& e = elements_[id];
    if (e.retired || e.n_children == 0) continue;
    bool ok = true;
    for (int c = 0; c < e.n_children; ++c) {
      const int ch = e.children[c];
      if (!elements_[ch].is_leaf() || !flagged.count(ch)) {
        ok = false;
        break;
      }
    }
    if (ok) candidates.push_back(id);
  }

  std::vector<char> accepted(candidates.size(), 1);
  std::unordered_map<int, int> cand_index;
  for (std::size_t i = 0; i < candidates.size(); ++i) cand_index[candidates[i]] = static_cast<int>(i);

  // Reject merges that would leave a hanging node, against the hypothetical
  // post-merge leaf set; iterate to a fixed point.
  while (true) {
    std::vector<char> corner(nodes_.size(), 0);
    for (int id = 0; id < static_cast<int>(elements_.size()); ++id) {
      const Element& e = elements_[id];
      if (!e.is_leaf()) continue;
      auto pit = e.parent >= 0 ? cand_index.find(e.parent) : cand_index.end();
      if (pit != cand_index.end() && accepted[pit->second]) continue;  // merged away
      for (int k : e.nodes) corner[k] = 1;
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (!accepted[i]) continue;
      for (int k : elements_[candidates[i]].nodes) corner[k] = 1;
    }
    bool changed = false;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (!accepted[i]) continue;
      const Element& p = elements_[candidates[i]];
      for (int k = 0; k < 3; ++k) {
        auto it = edge_midpoint_.find(edge_key(p.nodes[k], p.nodes[(k + 1) % 3]));
        if (it != edge_midpoint_.end() && corner[it->second]) {
          accepted[i] = 0;
          changed = true;
          break;
        }
      }
    }
    if (!changed) break;
  }

  int consumed = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!accepted[i]) continue;
    const int p = candidates[i];
    CoarsenMerge mg;
    mg.parent = p;
    mg.count = elements_[p].n_children;
    for (int c = 0; c < mg.count; ++c) {
      mg.children[c] = elements_[p].children[c];
      mg.child_areas[c] = area_raw(mg.children[c]);
    }
    merge_children(p);
    consumed += mg.count;
    rep.merge_list.push_back(mg);
    ++rep.merges;
  }
  rep.ignored = static_cast<int>(flagged.size()) - consumed;

  rebuild_topology();
  ++stamp_;
  return rep;
}

void MeshHierarchy::uniform_refine(int times) {
  if (times < 1) throw MeshError("uniform_refine requires times >= 1");
  for (int t = 0; t < times; ++t) {
    RefineReport rep;
    // red-split every leaf (greens included): the result is conforming, and
    // every leaf maps to exactly 4 children, which EmbeddedPair relies on
    const std::vector<int> leaves = active_;
    for (int id : leaves) split_red(id, rep);
    rebuild_topology();
    ++stamp_;
  }
}

void MeshHierarchy::rebuild_topology() {
  active_.clear();
  active_index_.clear();
  for (int id = 0; id < static_cast<int>(elements_.size()); ++id) {
    if (elements_[id].is_leaf()) {
      active_index_[id] = static_cast<int>(active_.size());
      active_.push_back(id);
    }
  }

  edges_.clear();
  elem_edges_.assign(active_.size(), {-1, -1, -1});
  std::unordered_map<std::uint64_t, int> edge_of;
  edge_of.reserve(active_.size() * 2);

  for (std::size_t ai = 0; ai < active_.size(); ++ai) {
    const int id = active_[ai];
    const auto& e = elements_[id];
    for (int k = 0; k < 3; ++k) {
      const int a = e.nodes[k];
      const int b = e.nodes[(k + 1) % 3];
      const std::uint64_t key = edge_key(a, b);
      auto it = edge_of.find(key);
      if (it == edge_of.end()) {
        Edge ed;
        ed.nodes = {a, b};
        ed.left = id;
        edge_of[key] = static_cast<int>(edges_.size());
        elem_edges_[ai][k] = static_cast<int>(edges_.size());
        edges_.push_back(ed);
      } else {
        Edge& ed = edges_[it->second];
        if (ed.right != -1)
          throw MeshError("duplicate edge: three active elements share an edge");
        if (!(ed.nodes[0] == b && ed.nodes[1] == a))
          throw MeshError("inconsistent edge orientation between active elements");
        ed.right = id;
        elem_edges_[ai][k] = it->second;
      }
    }
  }

  level_count_ = 1;
  for (int id : active_) level_count_ = std::max(level_count_, elements_[id].level + 1);

  for (auto& ed : edges_) {
    const auto& a = nodes_[ed.nodes[0]];
    const auto& b = nodes_[ed.nodes[1]];
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    ed.length = std::sqrt(dx * dx + dy * dy);
    if (ed.length <= 0.0) throw MeshError("zero-length edge");
    ed.normal = {dy / ed.length, -dx / ed.length};
    if (ed.right == -1) {
      auto it = boundary_marker_.find(edge_key(ed.nodes[0], ed.nodes[1]));
      if (it == boundary_marker_.end())
        throw MeshError("active mesh has a hanging node or an undeclared boundary edge");
      ed.marker = it->second;
    } else {
      ed.marker = BoundaryMarker::interior;
    }
  }
}

void MeshHierarchy::validate() const {
  for (int id : active_) {
    if (area_raw(id) <= 0.0)
      throw MeshError("active element " + std::to_string(id) + " has nonpositive area");
  }
  const double tiled = total_active_area();
  const double enclosed = boundary_enclosed_area();
  if (std::abs(tiled - enclosed) > 1e-10 * std::max(1.0, std::abs(enclosed)))
    throw MeshError("active elements do not tile the boundary-enclosed area: " +
                    std::to_string(tiled) + " vs " + std::to_string(enclosed));
  for (const auto& ed : edges_) {
    const double n2 = dot(ed.normal, ed.normal);
    if (std::abs(n2 - 1.0) > 1e-14)
      throw MeshError("edge normal is not unit length");
    if (ed.marker == BoundaryMarker::interior && (ed.left < 0 || ed.right < 0))
      throw MeshError("interior edge without two active elements");
  }
}

MeshHierarchy generate_naca_omesh(const std::string& profile, int n_around,
                                  int n_radial, double farfield_radius) {
  if (n_around < 16 || n_around % 2 != 0)
    throw MeshError("generate_naca_omesh: n_around must be even and >= 16");
  if (n_radial < 4) throw MeshError("generate_naca_omesh: n_radial must be >= 4");
  if (farfield_radius < 10.0)
    throw MeshError("generate_naca_omesh: farfield_radius must be >= 10 chords");

  NacaCurve curve(profile);
  const int n = n_around;

  // curve parameters, lower half assigned as exact mirrors of the upper half
  std::vector<double> s(n);
  for (int k = 0; k <= n / 2; ++k) s[k] = 2.0 * k / n;
  for (int k = n / 2 + 1; k < n; ++k) s[k] = 2.0 - s[n - k];

  std::vector<Vec2> wall(n), far(n);
  for (int k = 0; k <= n / 2; ++k) {
    wall[k] = curve.point(s[k]);
    far[k] = {0.5 + farfield_radius * std::cos(M_PI * s[k]),
              farfield_radius * std::sin(M_PI * s[k])};
  }
  // pin the self-mirrored rays so the mesh is exactly symmetric about y=0
  wall[n / 2] = {0.0, 0.0};
  far[0] = {0.5 + farfield_radius, 0.0};
  far[n / 2] = {0.5 - farfield_radius, 0.0};
  for (int k = n / 2 + 1; k < n; ++k) {
    wall[k] = {wall[n - k].x, -wall[n - k].y};
    far[k] = {far[n - k].x, -far[n - k].y};
  }
  if (curve.camber(0.3) != 0.0) {
    // cambered profile: the lower surface is not a mirror; evaluate directly
    for (int k = n / 2 + 1; k < n; ++k) wall[k] = curve.point(s[k]);
  }

  // geometric stretching towards the far field
  const double growth = 1.35;
  std::vector<double> frac(n_radial + 1);
  for (int r = 0; r <= n_radial; ++r)
    frac[r] = (std::pow(growth, r) - 1.0) / (std::pow(growth, n_radial) - 1.0);

  std::vector<MeshNode> nodes(static_cast<std::size_t>(n) * (n_radial + 1));
  const auto nid = [&](int k, int r) { return r * n + (k % n); };
  for (int r = 0; r <= n_radial; ++r) {
    for (int k = 0; k < n; ++k) {
      const Vec2 p = wall[k] + frac[r] * (far[k] - wall[k]);
      nodes[nid(k, r)] = {p.x, p.y};
    }
  }

  // CCW quad is (A, D, C, B): radially out, tangentially forward, back in.
  // The diagonal alternates between the halves so the triangulation is
  // mirror-symmetric about y = 0.
  std::vector<std::array<int, 3>> tris;
  tris.reserve(static_cast<std::size_t>(2) * n * n_radial);
  for (int r = 0; r < n_radial; ++r) {
    for (int k = 0; k < n; ++k) {
      const int A = nid(k, r), B = nid(k + 1, r), C = nid(k + 1, r + 1), D = nid(k, r + 1);
      // the quads butting the leading-edge ray take the other diagonal, so a
      // zero-thickness profile (slit on the axis) still triangulates
      const bool diag_ac = k < n / 2 - 1 || k == n / 2;
      if (diag_ac) {
        tris.push_back({A, D, C});
        tris.push_back({A, C, B});
      } else {
        tris.push_back({A, D, B});
        tris.push_back({D, C, B});
      }
    }
  }
  for (const auto& t : tris) {
    if (signed_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]) <= 1e-14)
      throw MeshError("degenerate cell at the trailing edge; increase n_around");
  }

  std::vector<BoundarySpec> boundary;
  for (int k = 0; k < n; ++k) {
    boundary.push_back({nid(k, 0), nid(k + 1, 0), BoundaryMarker::wall});
    boundary.push_back({nid(k, n_radial), nid(k + 1, n_radial), BoundaryMarker::farfield});
  }

  std::vector<std::string> warnings;
  MeshHierarchy m = MeshHierarchy::build(std::move(nodes), std::move(tris),
                                         std::move(boundary), &warnings);
  if (!warnings.empty())
    throw MeshError("O-mesh generator produced non-CCW triangles: " + warnings.front());
  m.curve_ = curve;
  for (int k = 0; k < n; ++k) m.wall_param_[nid(k, 0)] = s[k];
  return m;
}

}  // namespace goalfv
