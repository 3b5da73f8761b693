#pragma once

// Directed graphs satisfying the structural assumptions used throughout the
// toolkit (symmetric, loop-free, connected, bounded degree), together with
// walks, spanning trees, T-bases of closed walks and the gradient/potential
// machinery for arc functions.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace recip {

using VertexId = std::size_t;
using ArcId = std::size_t;

inline constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

struct Arc {
  VertexId src = 0;
  VertexId dst = 0;
  friend bool operator==(const Arc&, const Arc&) = default;
};

// Records that a graph is a finite window onto an infinite one. Boundary
// vertices lost some of their arcs when the window was cut.
struct Truncation {
  std::string description;
  std::vector<VertexId> boundary;
};

class DirectedGraph {
 public:
  // Validates every structural invariant. Arcs may be listed in any order;
  // duplicates are rejected. With symmetrize=true, each listed arc implies its reverse.
  static DirectedGraph build(std::vector<std::string> vertex_names,
                             const std::vector<std::pair<std::string, std::string>>& arcs,
                             bool symmetrize = false,
                             std::optional<Truncation> truncation = std::nullopt);

  static DirectedGraph build(std::vector<std::string> vertex_names,
                             const std::vector<Arc>& arcs,
                             bool symmetrize = false,
                             std::optional<Truncation> truncation = std::nullopt);

  std::size_t num_vertices() const { return names_.size(); }
  std::size_t num_arcs() const { return arcs_.size(); }
  std::size_t num_edges() const { return arcs_.size() / 2; }

  const std::string& name(VertexId v) const { return names_.at(v); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<VertexId> find(std::string_view name) const;
  // Throws DomainError for unknown names.
  VertexId id(std::string_view name) const;

  const Arc& arc(ArcId a) const { return arcs_[a]; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  std::optional<ArcId> find_arc(VertexId src, VertexId dst) const;
  ArcId arc_id(VertexId src, VertexId dst) const;
  ArcId reverse(ArcId a) const { return reverse_[a]; }
  std::string arc_label(ArcId a) const;

  // Out-arcs of v, ordered by target vertex order. Arc ids of one source are contiguous.
  std::span<const ArcId> out_arcs(VertexId v) const {
    return {out_ids_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::size_t out_degree(VertexId v) const { return offsets_[v + 1] - offsets_[v]; }
  std::size_t max_out_degree() const { return max_degree_; }

  std::vector<std::size_t> distances_from(VertexId v) const;

  bool is_truncated() const { return truncation_.has_value(); }
  const std::optional<Truncation>& truncation() const { return truncation_; }
  // Graph distance to the nearest truncation-boundary vertex; kUnbounded when untruncated.
  std::size_t boundary_distance(VertexId v) const { return boundary_distance_[v]; }
  bool is_interior(VertexId v, std::size_t margin = 2) const {
    return boundary_distance_[v] >= margin;
  }
  bool is_interior_arc(ArcId a, std::size_t margin = 2) const {
    return is_interior(arcs_[a].src, margin) && is_interior(arcs_[a].dst, margin);
  }

  friend bool operator==(const DirectedGraph& a, const DirectedGraph& b) {
    return a.names_ == b.names_ && a.arcs_ == b.arcs_;
  }

 private:
  DirectedGraph() = default;

  std::vector<std::string> names_;
  std::unordered_map<std::string, VertexId> index_;
  std::vector<Arc> arcs_;
  std::vector<ArcId> reverse_;
  std::vector<std::size_t> offsets_;
  std::vector<ArcId> out_ids_;
  std::size_t max_degree_ = 0;
  std::optional<Truncation> truncation_;
  std::vector<std::size_t> boundary_distance_;
};

// A walk is stored as its vertex sequence x_0, ..., x_n; its length is n.
// Length 0 is only produced by tree_walk(z, z).
struct Walk {
  std::vector<VertexId> vertices;

  std::size_t length() const { return vertices.empty() ? 0 : vertices.size() - 1; }
  VertexId front() const { return vertices.front(); }
  VertexId back() const { return vertices.back(); }
  friend bool operator==(const Walk&, const Walk&) = default;
};

class ClosedWalk {
 public:
  // Throws DomainError unless the sequence returns to its start and has length >= 1.
  explicit ClosedWalk(std::vector<VertexId> vertices);
  explicit ClosedWalk(Walk w) : ClosedWalk(std::move(w.vertices)) {}

  const std::vector<VertexId>& vertices() const { return walk_.vertices; }
  const Walk& walk() const { return walk_; }
  std::size_t length() const { return walk_.length(); }
  VertexId start() const { return walk_.vertices.front(); }
  friend bool operator==(const ClosedWalk&, const ClosedWalk&) = default;

 private:
  Walk walk_;
};

// Throws DomainError if some consecutive pair is not an arc of g.
void validate_walk(const DirectedGraph& g, const Walk& w);
std::vector<ArcId> walk_arcs(const DirectedGraph& g, const Walk& w);
std::string walk_label(const DirectedGraph& g, const Walk& w);

Walk walk_reverse(const Walk& w);
ClosedWalk walk_reverse(const ClosedWalk& c);

struct SpanningTree {
  VertexId root = 0;
  std::vector<VertexId> parent;     // parent[root] == root
  std::vector<std::size_t> depth;
  std::vector<bool> in_tree;        // indexed by ArcId, symmetric

  std::vector<ArcId> tree_arcs() const;
};

// Breadth-first tree; neighbours are visited in vertex order.
SpanningTree spanning_tree(const DirectedGraph& g, VertexId root);

// Tree given explicitly by undirected edges; throws GraphError unless they form a spanning tree.
SpanningTree tree_from_edges(const DirectedGraph& g, VertexId root,
                             const std::vector<std::pair<VertexId, VertexId>>& edges);

// The unique simple walk from -> to inside the tree.
Walk tree_walk(const SpanningTree& tree, VertexId from, VertexId to);

struct CycleBasis {
  std::vector<ClosedWalk> edge_walks;   // one (x -> y -> x) per arc, in ArcId order
  std::vector<ClosedWalk> fundamental;  // one f_{x->y} per non-tree edge

  std::size_t size() const { return edge_walks.size() + fundamental.size(); }
  // Edge walks counted once per undirected edge, plus the fundamental cycles.
  std::size_t undirected_size() const { return edge_walks.size() / 2 + fundamental.size(); }
  std::vector<ClosedWalk> all() const;
};

// For each non-tree edge {x, y} the fundamental cycle is oriented so that its
// first arc leaves the lower-ordered vertex.
CycleBasis t_basis(const DirectedGraph& g, const SpanningTree& tree);

// All closed walks of length 2..max_length (not necessarily simple), starting
// at every vertex. Intended for small graphs and diagnostics.
std::vector<ClosedWalk> enumerate_closed_walks(const DirectedGraph& g, std::size_t max_length);

class ArcFunction {
 public:
  ArcFunction() = default;
  explicit ArcFunction(std::vector<double> values) : values_(std::move(values)) {}
  ArcFunction(std::size_t num_arcs, double fill) : values_(num_arcs, fill) {}

  static ArcFunction gradient(const DirectedGraph& g, std::span<const double> potential);

  double operator[](ArcId a) const { return values_[a]; }
  double& operator[](ArcId a) { return values_[a]; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

double walk_sum(const DirectedGraph& g, const ArcFunction& ell, const Walk& w);
double walk_sum(const DirectedGraph& g, const ArcFunction& ell, const ClosedWalk& c);

// Largest |walk_sum| over the basis.
double max_cycle_residual(const DirectedGraph& g, const ArcFunction& ell, const CycleBasis& basis);
bool is_gradient(const DirectedGraph& g, const ArcFunction& ell, const CycleBasis& basis, double tol);

// psi(tagged) = 0 and ell(z -> z') = psi(z') - psi(z). Throws NumericalError
// when some arc disagrees with the reconstructed potential by more than tol.
std::vector<double> reconstruct_potential(const DirectedGraph& g, const ArcFunction& ell,
                                          VertexId tagged, double tol = 1e-8);

}  // namespace recip
