#include "recip/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <set>

#include "recip/error.hpp"

namespace recip {

namespace {

std::vector<std::size_t> bfs_distances(const DirectedGraph& g, std::span<const VertexId> sources) {
  std::vector<std::size_t> dist(g.num_vertices(), kUnbounded);
  std::deque<VertexId> queue;
  for (VertexId s : sources) {
    if (dist[s] != 0) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    VertexId v = queue.front();
    queue.pop_front();
    for (ArcId a : g.out_arcs(v)) {
      VertexId w = g.arc(a).dst;
      if (dist[w] == kUnbounded) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

}  // namespace

DirectedGraph DirectedGraph::build(std::vector<std::string> vertex_names,
                                   const std::vector<std::pair<std::string, std::string>>& arcs,
                                   bool symmetrize, std::optional<Truncation> truncation) {
  std::unordered_map<std::string, VertexId> index;
  for (VertexId v = 0; v < vertex_names.size(); ++v) {
    if (!index.emplace(vertex_names[v], v).second) {
      throw GraphError("duplicate vertex identifier '" + vertex_names[v] + "'");
    }
  }
  std::vector<Arc> ids;
  ids.reserve(arcs.size());
  for (const auto& [src, dst] : arcs) {
    auto s = index.find(src);
    auto d = index.find(dst);
    if (s == index.end()) throw GraphError("arc (" + src + "," + dst + ") references unknown vertex '" + src + "'");
    if (d == index.end()) throw GraphError("arc (" + src + "," + dst + ") references unknown vertex '" + dst + "'");
    ids.push_back({s->second, d->second});
  }
  return build(std::move(vertex_names), ids, symmetrize, std::move(truncation));
}

DirectedGraph DirectedGraph::build(std::vector<std::string> vertex_names, const std::vector<Arc>& arcs,
                                   bool symmetrize, std::optional<Truncation> truncation) {
  DirectedGraph g;
  g.names_ = std::move(vertex_names);
  const std::size_t n = g.names_.size();
  if (n == 0) throw GraphError("graph has no vertices");
  for (VertexId v = 0; v < n; ++v) {
    if (!g.index_.emplace(g.names_[v], v).second) {
      throw GraphError("duplicate vertex identifier '" + g.names_[v] + "'");
    }
  }

  std::set<std::pair<VertexId, VertexId>> arc_set;
  for (const Arc& a : arcs) {
    if (a.src >= n || a.dst >= n) throw GraphError("arc references vertex index out of range");
    if (a.src == a.dst) throw GraphError("loop detected at vertex '" + g.names_[a.src] + "'");
    if (!arc_set.emplace(a.src, a.dst).second && !symmetrize) {
      throw GraphError("duplicate arc (" + g.names_[a.src] + "," + g.names_[a.dst] + ")");
    }
    if (symmetrize) arc_set.emplace(a.dst, a.src);
  }
  for (const auto& [s, d] : arc_set) {
    if (!arc_set.contains({d, s})) {
      throw GraphError("asymmetric arc set: (" + g.names_[s] + "," + g.names_[d] + ") present but (" +
                       g.names_[d] + "," + g.names_[s] + ") missing");
    }
  }

  // std::set orders pairs lexicographically, which is exactly (source order, target order).
  g.arcs_.reserve(arc_set.size());
  for (const auto& [s, d] : arc_set) g.arcs_.push_back({s, d});
  g.offsets_.assign(n + 1, 0);
  for (const Arc& a : g.arcs_) ++g.offsets_[a.src + 1];
  for (VertexId v = 0; v < n; ++v) g.offsets_[v + 1] += g.offsets_[v];
  g.out_ids_.resize(g.arcs_.size());
  for (ArcId a = 0; a < g.arcs_.size(); ++a) g.out_ids_[a] = a;
  for (VertexId v = 0; v < n; ++v) g.max_degree_ = std::max(g.max_degree_, g.out_degree(v));

  g.reverse_.resize(g.arcs_.size());
  for (ArcId a = 0; a < g.arcs_.size(); ++a) g.reverse_[a] = *g.find_arc(g.arcs_[a].dst, g.arcs_[a].src);

  if (n > 1) {
    const VertexId origin = 0;
    auto dist = bfs_distances(g, std::span<const VertexId>(&origin, 1));
    for (VertexId v = 0; v < n; ++v) {
      if (dist[v] == kUnbounded) {
        throw GraphError("disconnected graph: vertex '" + g.names_[v] + "' unreachable from '" + g.names_[0] + "'");
      }
    }
  } else {
    throw GraphError("graph needs at least two vertices to carry an arc");
  }

  if (truncation) {
    for (VertexId b : truncation->boundary) {
      if (b >= n) throw GraphError("truncation boundary references vertex index out of range");
    }
    g.boundary_distance_ = bfs_distances(g, truncation->boundary);
    g.truncation_ = std::move(truncation);
  } else {
    g.boundary_distance_.assign(n, kUnbounded);
  }
  return g;
}

std::optional<VertexId> DirectedGraph::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

VertexId DirectedGraph::id(std::string_view name) const {
  auto v = find(name);
  if (!v) throw DomainError("unknown vertex '" + std::string(name) + "'");
  return *v;
}

std::optional<ArcId> DirectedGraph::find_arc(VertexId src, VertexId dst) const {
  if (src >= num_vertices()) return std::nullopt;
  auto out = out_arcs(src);
  auto it = std::lower_bound(out.begin(), out.end(), dst,
                             [this](ArcId a, VertexId d) { return arcs_[a].dst < d; });
  if (it == out.end() || arcs_[*it].dst != dst) return std::nullopt;
  return *it;
}

ArcId DirectedGraph::arc_id(VertexId src, VertexId dst) const {
  auto a = find_arc(src, dst);
  if (!a) {
    throw DomainError("(" + (src < num_vertices() ? names_[src] : std::to_string(src)) + "," +
                      (dst < num_vertices() ? names_[dst] : std::to_string(dst)) + ") is not an arc");
  }
  return *a;
}

std::string DirectedGraph::arc_label(ArcId a) const {
  return names_[arcs_[a].src] + "->" + names_[arcs_[a].dst];
}

std::vector<std::size_t> DirectedGraph::distances_from(VertexId v) const {
  return bfs_distances(*this, std::span<const VertexId>(&v, 1));
}

ClosedWalk::ClosedWalk(std::vector<VertexId> vertices) : walk_{std::move(vertices)} {
  if (walk_.vertices.size() < 2) throw DomainError("closed walk needs length >= 1");
  if (walk_.vertices.front() != walk_.vertices.back()) throw DomainError("walk is not closed");
}

void validate_walk(const DirectedGraph& g, const Walk& w) {
  for (std::size_t i = 0; i + 1 < w.vertices.size(); ++i) {
    g.arc_id(w.vertices[i], w.vertices[i + 1]);
  }
}

std::vector<ArcId> walk_arcs(const DirectedGraph& g, const Walk& w) {
  std::vector<ArcId> out;
  out.reserve(w.length());
  for (std::size_t i = 0; i + 1 < w.vertices.size(); ++i) out.push_back(g.arc_id(w.vertices[i], w.vertices[i + 1]));
  return out;
}

std::string walk_label(const DirectedGraph& g, const Walk& w) {
  std::string s;
  for (std::size_t i = 0; i < w.vertices.size(); ++i) {
    if (i) s += "->";
    s += g.name(w.vertices[i]);
  }
  return s;
}

Walk walk_reverse(const Walk& w) {
  return Walk{{w.vertices.rbegin(), w.vertices.rend()}};
}

ClosedWalk walk_reverse(const ClosedWalk& c) {
  return ClosedWalk(walk_reverse(c.walk()));
}

std::vector<ArcId> SpanningTree::tree_arcs() const {
  std::vector<ArcId> out;
  for (ArcId a = 0; a < in_tree.size(); ++a) {
    if (in_tree[a]) out.push_back(a);
  }
  return out;
}

SpanningTree spanning_tree(const DirectedGraph& g, VertexId root) {
  if (root >= g.num_vertices()) throw DomainError("tree root out of range");
  const std::size_t n = g.num_vertices();
  SpanningTree t;
  t.root = root;
  t.parent.assign(n, kUnbounded);
  t.depth.assign(n, 0);
  t.in_tree.assign(g.num_arcs(), false);
  t.parent[root] = root;
  std::deque<VertexId> queue{root};
  while (!queue.empty()) {
    VertexId v = queue.front();
    queue.pop_front();
    for (ArcId a : g.out_arcs(v)) {
      VertexId w = g.arc(a).dst;
      if (t.parent[w] != kUnbounded) continue;
      t.parent[w] = v;
      t.depth[w] = t.depth[v] + 1;
      t.in_tree[a] = true;
      t.in_tree[g.reverse(a)] = true;
      queue.push_back(w);
    }
  }
  return t;
}

SpanningTree tree_from_edges(const DirectedGraph& g, VertexId root,
                             const std::vector<std::pair<VertexId, VertexId>>& edges) {
  const std::size_t n = g.num_vertices();
  if (root >= n) throw DomainError("tree root out of range");
  if (edges.size() + 1 != n) throw GraphError("a spanning tree needs exactly |V| - 1 edges");
  std::vector<std::vector<ArcId>> adj(n);
  SpanningTree t;
  t.root = root;
  t.in_tree.assign(g.num_arcs(), false);
  for (auto [x, y] : edges) {
    ArcId a = g.arc_id(x, y);
    t.in_tree[a] = true;
    t.in_tree[g.reverse(a)] = true;
    adj[x].push_back(a);
    adj[y].push_back(g.reverse(a));
  }
  t.parent.assign(n, kUnbounded);
  t.depth.assign(n, 0);
  t.parent[root] = root;
  std::deque<VertexId> queue{root};
  std::size_t reached = 1;
  while (!queue.empty()) {
    VertexId v = queue.front();
    queue.pop_front();
    for (ArcId a : adj[v]) {
      VertexId w = g.arc(a).dst;
      if (t.parent[w] != kUnbounded) continue;
      t.parent[w] = v;
      t.depth[w] = t.depth[v] + 1;
      ++reached;
      queue.push_back(w);
    }
  }
  if (reached != n) throw GraphError("tree edges do not span the graph");
  return t;
}

Walk tree_walk(const SpanningTree& tree, VertexId from, VertexId to) {
  std::vector<VertexId> up;    // from -> lca
  std::vector<VertexId> down;  // to -> lca (reversed later)
  VertexId a = from;
  VertexId b = to;
  up.push_back(a);
  down.push_back(b);
  while (tree.depth[a] > tree.depth[b]) up.push_back(a = tree.parent[a]);
  while (tree.depth[b] > tree.depth[a]) down.push_back(b = tree.parent[b]);
  while (a != b) {
    up.push_back(a = tree.parent[a]);
    down.push_back(b = tree.parent[b]);
  }
  down.pop_back();  // lca already in up
  up.insert(up.end(), down.rbegin(), down.rend());
  return Walk{std::move(up)};
}

std::vector<ClosedWalk> CycleBasis::all() const {
  std::vector<ClosedWalk> out = edge_walks;
  out.insert(out.end(), fundamental.begin(), fundamental.end());
  return out;
}

CycleBasis t_basis(const DirectedGraph& g, const SpanningTree& tree) {
  CycleBasis basis;
  basis.edge_walks.reserve(g.num_arcs());
  for (const Arc& a : g.arcs()) basis.edge_walks.emplace_back(std::vector<VertexId>{a.src, a.dst, a.src});
  for (ArcId a = 0; a < g.num_arcs(); ++a) {
    const Arc& arc = g.arc(a);
    if (tree.in_tree[a] || arc.src > arc.dst) continue;
    Walk back = tree_walk(tree, arc.dst, arc.src);
    std::vector<VertexId> cycle{arc.src};
    cycle.insert(cycle.end(), back.vertices.begin(), back.vertices.end());
    basis.fundamental.emplace_back(std::move(cycle));
  }
  return basis;
}

std::vector<ClosedWalk> enumerate_closed_walks(const DirectedGraph& g, std::size_t max_length) {
  std::vector<ClosedWalk> out;
  std::vector<VertexId> stack;
  std::function<void(VertexId)> extend = [&](VertexId start) {
    VertexId v = stack.back();
    std::size_t len = stack.size() - 1;
    if (len == max_length) return;
    for (ArcId a : g.out_arcs(v)) {
      VertexId w = g.arc(a).dst;
      stack.push_back(w);
      if (w == start && len + 1 >= 2) out.emplace_back(stack);
      extend(start);
      stack.pop_back();
    }
  };
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    stack.assign(1, v);
    extend(v);
  }
  return out;
}

ArcFunction ArcFunction::gradient(const DirectedGraph& g, std::span<const double> potential) {
  std::vector<double> values(g.num_arcs());
  for (ArcId a = 0; a < g.num_arcs(); ++a) values[a] = potential[g.arc(a).dst] - potential[g.arc(a).src];
  return ArcFunction(std::move(values));
}

double walk_sum(const DirectedGraph& g, const ArcFunction& ell, const Walk& w) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < w.vertices.size(); ++i) s += ell[g.arc_id(w.vertices[i], w.vertices[i + 1])];
  return s;
}

double walk_sum(const DirectedGraph& g, const ArcFunction& ell, const ClosedWalk& c) {
  return walk_sum(g, ell, c.walk());
}

double max_cycle_residual(const DirectedGraph& g, const ArcFunction& ell, const CycleBasis& basis) {
  double worst = 0.0;
  for (const auto& c : basis.edge_walks) worst = std::max(worst, std::abs(walk_sum(g, ell, c)));
  for (const auto& c : basis.fundamental) worst = std::max(worst, std::abs(walk_sum(g, ell, c)));
  return worst;
}

bool is_gradient(const DirectedGraph& g, const ArcFunction& ell, const CycleBasis& basis, double tol) {
  return max_cycle_residual(g, ell, basis) <= tol;
}

std::vector<double> reconstruct_potential(const DirectedGraph& g, const ArcFunction& ell, VertexId tagged,
                                          double tol) {
  if (ell.size() != g.num_arcs()) throw DomainError("arc function size does not match graph");
  SpanningTree tree = spanning_tree(g, tagged);
  // BFS order guarantees parents are assigned before children.
  std::vector<VertexId> order{tagged};
  order.reserve(g.num_vertices());
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (ArcId a : g.out_arcs(order[i])) {
      VertexId w = g.arc(a).dst;
      if (tree.parent[w] == order[i] && w != tagged) order.push_back(w);
    }
  }
  std::vector<double> psi(g.num_vertices(), 0.0);
  for (VertexId v : order) {
    if (v == tagged) continue;
    psi[v] = psi[tree.parent[v]] + ell[g.arc_id(tree.parent[v], v)];
  }
  for (ArcId a = 0; a < g.num_arcs(); ++a) {
    double r = ell[a] - (psi[g.arc(a).dst] - psi[g.arc(a).src]);
    if (!(std::abs(r) <= tol)) {
      throw NumericalError("arc function is not a gradient: residual " + std::to_string(r) + " on arc " +
                           g.arc_label(a));
    }
  }
  return psi;
}

}  // namespace recip
