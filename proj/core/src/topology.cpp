#include "cplab/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <queue>
#include <set>

namespace cplab {

namespace {

std::uint64_t checked_pow(std::uint64_t base, int exp, std::uint64_t cap) {
  std::uint64_t v = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && v > cap / base) return cap + 1;
    v *= base;
  }
  return v;
}

}  // namespace

GraphTopology GraphTopology::build(const TopologyExtent& extent, BoundaryPolicy boundary,
                                   std::uint64_t vertex_budget) {
  GraphTopology g;
  g.boundary_ = boundary;
  std::vector<std::vector<VertexId>> adj;

  if (const auto* e = std::get_if<LatticeExtent>(&extent)) {
    require(e->dim >= 1, "lattice dim must be >= 1");
    require(e->radius >= 0, "lattice radius must be >= 0");
    const int d = e->dim, R = e->radius;
    const std::uint64_t side = 2ull * R + 1;
    const std::uint64_t n = checked_pow(side, d, vertex_budget);
    require(n <= vertex_budget, "lattice extent exceeds vertex budget");
    g.kind_ = GraphKind::lattice;
    g.dim_ = d;
    g.lat_radius_ = R;
    g.coords_.resize(n * d);
    std::vector<std::int32_t> c(d, -R);
    for (std::uint64_t v = 0; v < n; ++v) {
      for (int a = 0; a < d; ++a) g.coords_[v * d + a] = c[a];
      for (int a = d - 1; a >= 0; --a) {
        if (++c[a] <= R) break;
        c[a] = -R;
      }
    }
    std::vector<std::uint64_t> stride(d, 1);
    for (int a = d - 2; a >= 0; --a) stride[a] = stride[a + 1] * side;
    adj.resize(n);
    for (std::uint64_t v = 0; v < n; ++v) {
      for (int a = 0; a < d; ++a) {
        const std::int32_t x = g.coords_[v * d + a];
        std::uint64_t u;
        if (x < R) {
          u = v + stride[a];
        } else if (boundary == BoundaryPolicy::periodic && side >= 3) {
          u = v - (side - 1) * stride[a];
        } else {
          continue;
        }
        adj[v].push_back(static_cast<VertexId>(u));
        adj[u].push_back(static_cast<VertexId>(v));
      }
    }
    std::vector<std::int32_t> zero(d, 0);
    g.origin_ = g.vertex_at(zero);
    g.describe_ = "lattice d=" + std::to_string(d) + " R=" + std::to_string(R);
  } else if (const auto* e = std::get_if<TreeExtent>(&extent)) {
    require(e->branching >= 1, "tree branching must be >= 1");
    require(e->depth >= 0, "tree depth must be >= 0");
    require(boundary == BoundaryPolicy::free, "trees support only free boundary");
    const int d = e->branching, L = e->depth;
    std::uint64_t n = 1, level = 0;
    for (int l = 1; l <= L; ++l) {
      level = (l == 1) ? std::uint64_t(d) + 1 : level * d;
      n += level;
      require(n <= vertex_budget, "tree extent exceeds vertex budget");
    }
    g.kind_ = GraphKind::tree;
    g.tree_depth_limit_ = L;
    g.labels_.reserve(n);
    g.depth_.reserve(n);
    g.parent_.reserve(n);
    g.first_child_.assign(n, 0);
    g.child_count_.assign(n, 0);
    adj.resize(n);
    g.labels_.push_back(TreeLabel{0});
    g.depth_.push_back(0);
    g.parent_.push_back(0);
    VertexId next = 1;
    for (VertexId v = 0; v < static_cast<VertexId>(n) && next < n; ++v) {
      if (g.depth_[v] == L) continue;
      const int fanout = (v == 0) ? d + 1 : d;
      g.first_child_[v] = next;
      g.child_count_[v] = static_cast<std::uint32_t>(fanout);
      for (int i = 1; i <= fanout; ++i) {
        TreeLabel lab = g.labels_[v];
        lab.push_back(static_cast<std::uint16_t>(i));
        g.labels_.push_back(std::move(lab));
        g.depth_.push_back(g.depth_[v] + 1);
        g.parent_.push_back(v);
        adj[v].push_back(next);
        adj[next].push_back(v);
        ++next;
      }
    }
    g.origin_ = 0;
    g.describe_ = "tree d=" + std::to_string(d) + " depth=" + std::to_string(L);
  } else if (const auto* e = std::get_if<HalfLineExtent>(&extent)) {
    require(e->length >= 1, "half-line length must be >= 1");
    require(boundary == BoundaryPolicy::free, "half-line supports only free boundary");
    const std::uint64_t n = static_cast<std::uint64_t>(e->length);
    require(n <= vertex_budget, "half-line extent exceeds vertex budget");
    g.kind_ = GraphKind::half_line;
    g.half_line_length_ = e->length;
    adj.resize(n);
    for (std::uint64_t v = 0; v + 1 < n; ++v) {
      adj[v].push_back(static_cast<VertexId>(v + 1));
      adj[v + 1].push_back(static_cast<VertexId>(v));
    }
    g.origin_ = 0;
    g.describe_ = "half-line n=" + std::to_string(e->length);
  } else if (const auto* e = std::get_if<SlabExtent>(&extent)) {
    require(e->dim >= 2, "slab dim must be >= 2");
    require(e->width >= 1, "slab width must be >= 1");
    require(e->half_length >= 0, "slab half_length must be >= 0");
    const int d = e->dim, w = e->width, L = e->half_length;
    const std::uint64_t axis = 2ull * L + 1;
    std::uint64_t n = checked_pow(static_cast<std::uint64_t>(w), d - 1, vertex_budget);
    require(n <= vertex_budget && n <= vertex_budget / axis, "slab extent exceeds vertex budget");
    n *= axis;
    g.kind_ = GraphKind::slab;
    g.dim_ = d;
    g.slab_width_ = w;
    g.slab_half_length_ = L;
    g.coords_.resize(n * d);
    std::vector<std::int32_t> lo(d, 0), hi(d, w - 1), c(d);
    lo[d - 1] = -L;
    hi[d - 1] = L;
    c = lo;
    for (std::uint64_t v = 0; v < n; ++v) {
      for (int a = 0; a < d; ++a) g.coords_[v * d + a] = c[a];
      for (int a = d - 1; a >= 0; --a) {
        if (++c[a] <= hi[a]) break;
        c[a] = lo[a];
      }
    }
    std::vector<std::uint64_t> stride(d, 1);
    for (int a = d - 2; a >= 0; --a)
      stride[a] = stride[a + 1] * (a + 1 == d - 1 ? axis : std::uint64_t(w));
    adj.resize(n);
    for (std::uint64_t v = 0; v < n; ++v) {
      for (int a = 0; a < d; ++a) {
        const std::int32_t x = g.coords_[v * d + a];
        std::uint64_t u;
        if (x < hi[a]) {
          u = v + stride[a];
        } else if (a == d - 1 && boundary == BoundaryPolicy::periodic && axis >= 3) {
          u = v - (axis - 1) * stride[a];
        } else {
          continue;
        }
        adj[v].push_back(static_cast<VertexId>(u));
        adj[u].push_back(static_cast<VertexId>(v));
      }
    }
    std::vector<std::int32_t> o(d, 0);
    g.origin_ = g.vertex_at(o);
    g.describe_ =
        "slab d=" + std::to_string(d) + " k=" + std::to_string(w) + " L=" + std::to_string(L);
  } else if (const auto* e = std::get_if<ExplicitExtent>(&extent)) {
    require(e->vertex_count >= 1, "explicit graph needs at least one vertex");
    require(e->vertex_count <= vertex_budget, "explicit extent exceeds vertex budget");
    require(boundary == BoundaryPolicy::free, "explicit graphs support only free boundary");
    g.kind_ = GraphKind::explicit_edges;
    adj.resize(e->vertex_count);
    std::set<std::pair<VertexId, VertexId>> seen;
    for (auto [u, v] : e->edges) {
      require(u < e->vertex_count && v < e->vertex_count, "explicit edge endpoint out of range");
      require(u != v, "explicit self-loop rejected");
      auto key = std::minmax(u, v);
      require(seen.insert({key.first, key.second}).second, "duplicate explicit edge rejected");
      adj[u].push_back(v);
      adj[v].push_back(u);
    }
    for (auto& l : adj) std::sort(l.begin(), l.end());
    g.origin_ = 0;
    g.describe_ = "explicit n=" + std::to_string(e->vertex_count) +
                  " m=" + std::to_string(e->edges.size());
  } else {
    fail("unknown topology extent");
  }

  const VertexId n = static_cast<VertexId>(adj.size());
  g.offsets_.assign(n + 1, 0);
  for (VertexId v = 0; v < n; ++v)
    g.offsets_[v + 1] = g.offsets_[v] + static_cast<std::uint32_t>(adj[v].size());
  g.neighbors_.reserve(g.offsets_[n]);
  for (VertexId v = 0; v < n; ++v)
    g.neighbors_.insert(g.neighbors_.end(), adj[v].begin(), adj[v].end());

  {
    auto dist = g.distances_from(g.origin_);
    for (VertexId v = 0; v < n; ++v) require(dist[v] != UINT32_MAX, "graph must be connected");
  }

  g.finalize();
  return g;
}

void GraphTopology::finalize() {
  const VertexId n = vertex_count();
  arrow_source_.resize(neighbors_.size());
  for (VertexId v = 0; v < n; ++v)
    for (std::uint32_t a = offsets_[v]; a < offsets_[v + 1]; ++a) arrow_source_[a] = v;

  std::uint64_t h = kFnvOffset;
  h = fnv1a_u64(static_cast<std::uint64_t>(kind_), h);
  h = fnv1a_u64(static_cast<std::uint64_t>(boundary_), h);
  h = fnv1a_u64(n, h);
  for (VertexId v = 0; v < n; ++v) {
    h = fnv1a_u64(offsets_[v + 1], h);
    for (std::uint32_t a = offsets_[v]; a < offsets_[v + 1]; ++a) h = fnv1a_u64(neighbors_[a], h);
  }
  hash_ = h;
}

VertexId GraphTopology::vertex_at(std::span<const std::int32_t> c) const {
  require(kind_ == GraphKind::lattice || kind_ == GraphKind::slab,
          "vertex_at requires a coordinate topology");
  require(static_cast<int>(c.size()) == dim_, "vertex_at: wrong coordinate count");
  std::uint64_t id = 0;
  std::uint64_t total = 1;
  for (int a = 0; a < dim_; ++a) {
    std::int64_t lo, hi;
    if (kind_ == GraphKind::lattice) {
      lo = -lat_radius_;
      hi = lat_radius_;
    } else if (a < dim_ - 1) {
      lo = 0;
      hi = slab_width_ - 1;
    } else {
      lo = -slab_half_length_;
      hi = slab_half_length_;
    }
    if (c[a] < lo || c[a] > hi) return static_cast<VertexId>(coords_.size() / dim_);
    const std::uint64_t size = static_cast<std::uint64_t>(hi - lo + 1);
    id = id * size + static_cast<std::uint64_t>(c[a] - lo);
    total *= size;
  }
  (void)total;
  return static_cast<VertexId>(id);
}

std::vector<std::uint32_t> GraphTopology::distances_from(VertexId o) const {
  std::vector<std::uint32_t> dist(vertex_count(), UINT32_MAX);
  std::queue<VertexId> q;
  dist[o] = 0;
  q.push(o);
  while (!q.empty()) {
    const VertexId v = q.front();
    q.pop();
    for (VertexId u : neighbors(v)) {
      if (dist[u] == UINT32_MAX) {
        dist[u] = dist[v] + 1;
        q.push(u);
      }
    }
  }
  return dist;
}

std::uint32_t GraphTopology::safe_radius(VertexId o) const {
  require(o < vertex_count(), "safe_radius: vertex out of range");
  switch (kind_) {
    case GraphKind::lattice: {
      if (boundary_ == BoundaryPolicy::periodic) return static_cast<std::uint32_t>(lat_radius_);
      std::int32_t m = lat_radius_;
      for (int a = 0; a < dim_; ++a) m = std::min(m, lat_radius_ - std::abs(coord(o, a)));
      return static_cast<std::uint32_t>(m);
    }
    case GraphKind::tree:
      return static_cast<std::uint32_t>(tree_depth_limit_ - depth_[o]);
    case GraphKind::half_line:
      return static_cast<std::uint32_t>(half_line_length_ - 1 - static_cast<int>(o));
    case GraphKind::slab: {
      if (boundary_ == BoundaryPolicy::periodic)
        return static_cast<std::uint32_t>(slab_half_length_);
      return static_cast<std::uint32_t>(slab_half_length_ - std::abs(coord(o, dim_ - 1)));
    }
    case GraphKind::explicit_edges:
      return UINT32_MAX;
  }
  return 0;
}

void GraphTopology::write_edge_list(std::ostream& os) const {
  os << "#vertices " << vertex_count() << "\n";
  for (VertexId v = 0; v < vertex_count(); ++v)
    for (VertexId u : neighbors(v))
      if (v < u) os << v << " " << u << "\n";
}

std::uint32_t VertexSubset::count() const {
  std::uint32_t c = 0;
  for (auto b : mask) c += b;
  return c;
}

std::vector<VertexId> VertexSubset::members() const {
  std::vector<VertexId> out;
  for (VertexId v = 0; v < mask.size(); ++v)
    if (mask[v]) out.push_back(v);
  return out;
}

VertexSubset ball(const GraphTopology& g, VertexId o, std::uint32_t n) {
  require(o < g.vertex_count(), "ball: vertex out of range");
  const std::uint32_t safe = g.safe_radius(o);
  if (n > safe)
    fail("ball radius " + std::to_string(n) + " exceeds safe radius " + std::to_string(safe) +
         ": content would be truncation-biased");
  auto dist = g.distances_from(o);
  VertexSubset s;
  s.topology_hash = g.hash();
  s.provenance = "ball o=" + std::to_string(o) + " n=" + std::to_string(n);
  s.mask.assign(g.vertex_count(), 0);
  for (VertexId v = 0; v < g.vertex_count(); ++v)
    if (dist[v] <= n) s.mask[v] = 1;
  return s;
}

std::vector<double> growth_exponent(const GraphTopology& g, VertexId o, std::uint32_t n_max) {
  const std::uint32_t safe = g.safe_radius(o);
  require(n_max <= safe, "growth_exponent: n_max exceeds safe radius");
  auto dist = g.distances_from(o);
  std::vector<std::uint64_t> counts(n_max + 1, 0);
  for (auto d : dist)
    if (d <= n_max) ++counts[d];
  std::vector<double> out;
  std::uint64_t cum = counts[0];
  for (std::uint32_t n = 1; n <= n_max; ++n) {
    cum += counts[n];
    out.push_back(std::pow(static_cast<double>(cum), 1.0 / n));
  }
  return out;
}

std::vector<double> density_profile(const GraphTopology& g, const VertexSubset& s, VertexId o,
                                    std::uint32_t n_max) {
  require(s.topology_hash == g.hash(), "density_profile: subset belongs to another topology");
  const std::uint32_t safe = g.safe_radius(o);
  require(n_max <= safe, "density_profile: n_max exceeds safe radius");
  auto dist = g.distances_from(o);
  std::vector<std::uint64_t> in(n_max + 1, 0), all(n_max + 1, 0);
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (dist[v] <= n_max) {
      ++all[dist[v]];
      if (s.contains(v)) ++in[dist[v]];
    }
  }
  std::vector<double> out;
  std::uint64_t ci = in[0], ca = all[0];
  for (std::uint32_t n = 1; n <= n_max; ++n) {
    ci += in[n];
    ca += all[n];
    out.push_back(static_cast<double>(ci) / static_cast<double>(ca));
  }
  return out;
}

VertexSubset tree_delta(const GraphTopology& g) {
  require(g.kind() == GraphKind::tree, "tree_delta requires a tree");
  VertexSubset s;
  s.topology_hash = g.hash();
  s.provenance = "tree-delta";
  s.mask.assign(g.vertex_count(), 0);
  for (VertexId v = 0; v < g.vertex_count(); ++v)
    if (g.tree_label(v).back() != 1) s.mask[v] = 1;
  return s;
}

std::vector<VertexId> ray(const GraphTopology& g, VertexId x) {
  require(g.kind() == GraphKind::tree, "ray requires a tree");
  require(g.tree_label(x).back() != 1, "ray head must have a label not ending in 1");
  std::vector<VertexId> out{x};
  VertexId v = x;
  while (g.tree_depth(v) < g.tree_truncation_depth()) {
    v = g.tree_first_child(v);
    out.push_back(v);
  }
  return out;
}

std::vector<VertexId> ray_heads(const GraphTopology& g) {
  require(g.kind() == GraphKind::tree, "ray_heads requires a tree");
  std::vector<VertexId> head(g.vertex_count());
  head[0] = 0;
  for (VertexId v = 1; v < g.vertex_count(); ++v)
    head[v] = (g.tree_label(v).back() == 1) ? head[g.tree_parent(v)] : v;
  return head;
}

VertexSubset sublattice(const GraphTopology& g, int m) {
  require(g.kind() == GraphKind::lattice, "sublattice requires a lattice");
  require(m >= 1, "sublattice width must be >= 1");
  VertexSubset s;
  s.topology_hash = g.hash();
  s.provenance = "sublattice m=" + std::to_string(m);
  s.mask.assign(g.vertex_count(), 0);
  const int last = g.dim() - 1;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    const std::int32_t x = g.coord(v, last);
    if (x >= 0 && x < m) s.mask[v] = 1;
  }
  return s;
}

std::uint64_t slab_cell(const GraphTopology& g, VertexId v, int k) {
  require(g.kind() == GraphKind::lattice || g.kind() == GraphKind::slab,
          "slab_cell requires a coordinate graph");
  require(k >= 1, "slab width must be >= 1");
  std::uint64_t h = kFnvOffset;
  for (int a = 0; a + 1 < g.dim(); ++a) {
    const std::int64_t x = g.coord(v, a);
    const std::int64_t q = (x >= 0) ? x / k : -((-x + k - 1) / k);
    h = fnv1a_u64(static_cast<std::uint64_t>(q + (1ll << 32)), h);
  }
  return h;
}

}  // namespace cplab
