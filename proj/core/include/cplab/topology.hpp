#pragma once
// Finite graphs the simulator runs on: boxes of the d-dimensional integer
// lattice, depth-truncated homogeneous trees, half-lines, slabs (a few
// confined coordinates times one long axis), and explicit edge lists.
//
// Construction is deterministic: lattice/slab vertices are indexed in
// lexicographic coordinate order, tree vertices in breadth-first label order.
// Every topology knows which vertices sit against a truncation boundary, so
// ball queries can refuse radii whose content would be biased by truncation.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cplab/util.hpp"

namespace cplab {

using VertexId = std::uint32_t;

// Sentinel for "no vertex", e.g. the missing endpoint of a one-ended event.
inline constexpr VertexId kNoVertex = 0xffffffffu;

enum class GraphKind { lattice, tree, half_line, slab, explicit_edges };
enum class BoundaryPolicy { free, periodic };

struct LatticeExtent {
  int dim = 1;
  int radius = 1;  // box [-radius, radius]^dim
};
struct TreeExtent {
  int branching = 2;  // every vertex has branching+1 neighbours when untruncated
  int depth = 1;      // levels 0..depth
};
struct HalfLineExtent {
  int length = 1;  // {0, ..., length-1}
};
struct SlabExtent {
  int dim = 2;          // ambient dimension; must be >= 2
  int width = 1;        // first dim-1 coordinates in {0..width-1}
  int half_length = 1;  // last coordinate in [-half_length, half_length]
};
struct ExplicitExtent {
  VertexId vertex_count = 0;
  std::vector<std::pair<VertexId, VertexId>> edges;
};

using TopologyExtent =
    std::variant<LatticeExtent, TreeExtent, HalfLineExtent, SlabExtent, ExplicitExtent>;

// Tree vertex label: root is (0); the root's children are (0,i) with
// i in 1..branching+1; any deeper vertex appends an entry in 1..branching
// to its parent's label.
using TreeLabel = std::vector<std::uint16_t>;

class GraphTopology {
 public:
  static constexpr std::uint64_t kDefaultVertexBudget = 4'000'000;

  static GraphTopology build(const TopologyExtent& extent,
                             BoundaryPolicy boundary = BoundaryPolicy::free,
                             std::uint64_t vertex_budget = kDefaultVertexBudget);

  GraphKind kind() const { return kind_; }
  BoundaryPolicy boundary() const { return boundary_; }
  VertexId vertex_count() const { return static_cast<VertexId>(offsets_.size() - 1); }
  std::size_t edge_count() const { return neighbors_.size() / 2; }
  VertexId origin() const { return origin_; }

  std::span<const VertexId> neighbors(VertexId v) const {
    return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
  }
  std::uint32_t degree(VertexId v) const { return offsets_[v + 1] - offsets_[v]; }

  // Directed arrows: arrow a points from arrow_from(a) to arrow_to(a); the
  // arrows out of v occupy ids [arrow_begin(v), arrow_begin(v)+degree(v)).
  std::uint32_t arrow_count() const { return static_cast<std::uint32_t>(neighbors_.size()); }
  VertexId arrow_to(std::uint32_t a) const { return neighbors_[a]; }
  VertexId arrow_from(std::uint32_t a) const { return arrow_source_[a]; }
  std::uint32_t arrow_begin(VertexId v) const { return offsets_[v]; }

  // Coordinates (lattice/slab); axis in [0, dim).
  int dim() const { return dim_; }
  std::int32_t coord(VertexId v, int axis) const { return coords_[std::size_t(v) * dim_ + axis]; }
  // Vertex at the given coordinates, or vertex_count() if outside the graph.
  VertexId vertex_at(std::span<const std::int32_t> c) const;

  // Tree structure.
  const TreeLabel& tree_label(VertexId v) const { return labels_[v]; }
  int tree_depth(VertexId v) const { return depth_[v]; }
  VertexId tree_parent(VertexId v) const { return parent_[v]; }
  VertexId tree_first_child(VertexId v) const { return first_child_[v]; }
  std::uint32_t tree_child_count(VertexId v) const { return child_count_[v]; }
  int tree_truncation_depth() const { return tree_depth_limit_; }

  std::vector<std::uint32_t> distances_from(VertexId o) const;

  // Largest n for which B(o, n) is guaranteed free of truncation bias.
  std::uint32_t safe_radius(VertexId o) const;

  std::uint64_t hash() const { return hash_; }
  std::string describe() const { return describe_; }

  // "#vertices N" header, then one "u v" line per undirected edge, u < v.
  void write_edge_list(std::ostream& os) const;

 private:
  GraphTopology() = default;
  void finalize();  // arrow sources, hash

  GraphKind kind_ = GraphKind::explicit_edges;
  BoundaryPolicy boundary_ = BoundaryPolicy::free;
  VertexId origin_ = 0;
  int dim_ = 0;

  std::vector<std::uint32_t> offsets_;   // CSR adjacency, size V+1
  std::vector<VertexId> neighbors_;      // size 2E
  std::vector<VertexId> arrow_source_;   // size 2E
  std::vector<std::int32_t> coords_;     // lattice/slab: V*dim
  std::vector<TreeLabel> labels_;        // tree
  std::vector<std::int32_t> depth_;      // tree
  std::vector<VertexId> parent_, first_child_;
  std::vector<std::uint32_t> child_count_;
  int tree_depth_limit_ = 0;

  // extent payload needed by safe_radius
  int lat_radius_ = 0, slab_width_ = 0, slab_half_length_ = 0, half_line_length_ = 0;

  std::uint64_t hash_ = 0;
  std::string describe_;
};

struct VertexSubset {
  std::uint64_t topology_hash = 0;
  std::string provenance;
  std::vector<std::uint8_t> mask;

  bool contains(VertexId v) const { return mask[v] != 0; }
  std::uint32_t count() const;
  std::vector<VertexId> members() const;
};

// Graph ball B(o, n); throws if n exceeds safe_radius(o) (truncation bias).
VertexSubset ball(const GraphTopology& g, VertexId o, std::uint32_t n);

// |B(o, n)|^(1/n) for n = 1..n_max.
std::vector<double> growth_exponent(const GraphTopology& g, VertexId o, std::uint32_t n_max);

// |S ∩ B(o, n)| / |B(o, n)| for n = 1..n_max.
std::vector<double> density_profile(const GraphTopology& g, const VertexSubset& s, VertexId o,
                                    std::uint32_t n_max);

// Tree vertices whose label does not end in 1 (the root qualifies).
VertexSubset tree_delta(const GraphTopology& g);

// Descending chain x, first-child(x), first-child^2(x), ... down to the
// truncation depth. x must have a label not ending in 1.
std::vector<VertexId> ray(const GraphTopology& g, VertexId x);

// For every vertex, the head of the unique ray containing it (strip trailing
// 1-entries from the label). Rays partition the tree's vertex set.
std::vector<VertexId> ray_heads(const GraphTopology& g);

// Lattice vertices whose last coordinate lies in {0..m-1}.
VertexSubset sublattice(const GraphTopology& g, int m);

// Identifier of the width-k slab containing v: the tuple of floor(x_i / k)
// over the first dim-1 axes, hashed for equality grouping. On a 1-d lattice
// every vertex belongs to the same (unique) slab.
std::uint64_t slab_cell(const GraphTopology& g, VertexId v, int k);

}  // namespace cplab
