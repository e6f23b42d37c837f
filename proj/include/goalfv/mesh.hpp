// Unstructured triangular mesh with hierarchical red refinement plus
// green/blue closure, coarsening, geometry queries, and O-mesh generation
// around NACA profiles.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "goalfv/euler.hpp"
#include "goalfv/naca.hpp"

namespace goalfv {

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class BoundaryMarker : int { interior = 0, wall = 1, farfield = 2 };

struct MeshNode {
  double x = 0.0;
  double y = 0.0;
};

struct Element {
  std::array<int, 3> nodes{-1, -1, -1};  // CCW
  int parent = -1;
  std::array<int, 4> children{-1, -1, -1, -1};  // red 4, green 2, blue 3
  int n_children = 0;
  int level = 0;
  bool green = false;    // created by closure (green bisection or blue split)
  bool retired = false;  // removed by coarsening; slot kept, never reused
  bool is_leaf() const { return n_children == 0 && !retired; }
};

struct Edge {
  std::array<int, 2> nodes{-1, -1};  // ordered CCW as seen from `left`
  int left = -1;                     // active element id
  int right = -1;                    // -1 on boundary
  Vec2 normal;                       // unit, outward from left
  double length = 0.0;
  BoundaryMarker marker = BoundaryMarker::interior;
};

struct BoundarySpec {
  int a = -1;
  int b = -1;
  BoundaryMarker marker = BoundaryMarker::wall;
};

struct CoarsenMerge {
  int parent = -1;
  std::array<int, 4> children{-1, -1, -1, -1};
  std::array<double, 4> child_areas{0, 0, 0, 0};
  int count = 0;
};

struct RefineReport {
  int red_splits = 0;
  int green_splits = 0;
  int blue_splits = 0;
  int green_merges = 0;
  // green pairs re-merged before refinement; field carriers need these to
  // move values onto the merged parents
  std::vector<CoarsenMerge> green_merge_list;
};

struct CoarsenReport {
  int merges = 0;
  int ignored = 0;
  std::vector<CoarsenMerge> merge_list;
};

/// Triangular mesh plus its refinement tree. Active (leaf) elements tile the
/// domain; per-element fields are indexed by position in active_ids().
/// Mutation (refine/coarsen) is single-writer; all queries are const.
class MeshHierarchy {
 public:
  MeshHierarchy() = default;

  /// Build a level-0 mesh. Non-CCW triangles are fixed with a warning pushed
  /// to `warnings`; inconsistent adjacency or duplicate edges throw.
  static MeshHierarchy build(std::vector<MeshNode> nodes,
                             std::vector<std::array<int, 3>> triangles,
                             std::vector<BoundarySpec> boundary,
                             std::vector<std::string>* warnings = nullptr);

  // --- queries ---------------------------------------------------------
  int active_count() const { return static_cast<int>(active_.size()); }
  const std::vector<int>& active_ids() const { return active_; }
  int active_index_of(int element_id) const;
  const std::vector<MeshNode>& nodes() const { return nodes_; }
  const std::vector<Element>& elements() const { return elements_; }
  const std::vector<Edge>& edges() const { return edges_; }
  /// Edge ids of active element (by active index), CCW local order.
  const std::array<int, 3>& element_edges(int active_index) const {
    return elem_edges_[active_index];
  }
  int level_count() const { return level_count_; }
  int max_level_cap() const { return level_cap_; }
  void set_level_cap(int cap) { level_cap_ = cap; }
  std::uint64_t stamp() const { return stamp_; }
  bool has_curve() const { return curve_.has_value(); }
  const NacaCurve& curve() const { return *curve_; }
  bool wall_node_parameter_known(int node_id) const {
    return wall_param_.count(node_id) > 0;
  }

  Vec2 barycenter(int element_id) const;  // active elements only
  double area(int element_id) const;      // active elements only
  Vec2 barycenter_by_index(int active_index) const {
    return barycenter(active_[active_index]);
  }
  double area_by_index(int active_index) const { return area(active_[active_index]); }

  double total_active_area() const;
  /// Area enclosed by the current boundary polygon (shoelace over boundary
  /// edges); equals total_active_area when the active elements tile cleanly.
  double boundary_enclosed_area() const;
  int count_wall_edges() const;
  std::uint64_t checksum() const;

  // --- mutation --------------------------------------------------------
  /// Red refinement of flagged active elements (flags indexed like
  /// active_ids()), with green/blue closure so no hanging node remains.
  /// Closure elements are re-merged before refinement touches the mesh.
  RefineReport refine(const std::vector<std::uint8_t>& flags);

  /// Merge sibling groups whose members are all flagged, skipping merges
  /// that would create hanging nodes. Non-mergeable flags are ignored.
  CoarsenReport coarsen(const std::vector<std::uint8_t>& flags);

  void uniform_refine(int times);

  // genuine validation pass; throws MeshError on broken invariants
  void validate() const;

 private:
  friend MeshHierarchy generate_naca_omesh(const std::string&, int, int, double);

  static std::uint64_t edge_key(int a, int b);
  int midpoint_node(int a, int b);
  void split_red(int element_id, RefineReport& rep);
  void split_green(int element_id, int hanging_edge_local, RefineReport& rep);
  void split_blue(int element_id, int unhung_edge_local, RefineReport& rep);
  void merge_children(int parent_id);
  void rebuild_topology();
  double area_raw(int element_id) const;  // no active check

  std::vector<MeshNode> nodes_;
  std::vector<Element> elements_;
  std::vector<int> active_;  // ascending element ids of leaves
  std::unordered_map<int, int> active_index_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> elem_edges_;
  // sorted node pair -> marker, for boundary edges at every level
  std::unordered_map<std::uint64_t, BoundaryMarker> boundary_marker_;
  // sorted node pair -> midpoint node id, once created
  std::unordered_map<std::uint64_t, int> edge_midpoint_;
  std::optional<NacaCurve> curve_;
  std::unordered_map<int, double> wall_param_;  // node id -> curve parameter
  int level_count_ = 1;
  int level_cap_ = 25;
  std::uint64_t stamp_ = 0;
};

/// O-topology mesh around a NACA 4-digit profile: n_around wall nodes
/// (cosine-clustered, mirror-symmetric), n_radial rings stretched towards a
/// circular far field of the given radius, each quad split into 2 triangles
/// with a mirror-symmetric diagonal pattern.
MeshHierarchy generate_naca_omesh(const std::string& profile, int n_around,
                                  int n_radial, double farfield_radius);

}  // namespace goalfv
