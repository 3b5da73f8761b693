#include "recip/presets.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

#include "recip/characteristics.hpp"
#include "recip/error.hpp"

namespace recip {

namespace {

GraphPtr make_graph(std::vector<std::string> names, const std::vector<Arc>& arcs,
                    std::optional<Truncation> truncation = std::nullopt) {
  return std::make_shared<const DirectedGraph>(
      DirectedGraph::build(std::move(names), arcs, false, std::move(truncation)));
}

std::vector<VertexId> deficient_vertices(const std::vector<std::vector<VertexId>>& nbrs, std::size_t full) {
  std::vector<VertexId> out;
  for (VertexId v = 0; v < nbrs.size(); ++v) {
    if (nbrs[v].size() < full) out.push_back(v);
  }
  return out;
}

std::string join_underscore(const std::vector<long>& c) {
  std::string s;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) s += "_";
    s += std::to_string(c[i]);
  }
  return s;
}

// Direction label per arc for translation-invariant lattices; rates indexed by it.
struct Lattice {
  GraphPtr graph;
  std::vector<std::size_t> direction;  // per ArcId
};

Lattice zd_lattice(std::size_t d, std::size_t L) {
  if (d < 1 || d > 4) throw DomainError("Z^d box needs 1 <= d <= 4");
  if (L < 5) throw DomainError("Z^d box side must be >= 5");
  std::size_t n = 1;
  for (std::size_t i = 0; i < d; ++i) n *= L;
  std::vector<std::string> names(n);
  std::vector<std::vector<VertexId>> nbrs(n);
  std::vector<Arc> arcs;
  std::vector<std::vector<long>> coords(n, std::vector<long>(d));
  for (VertexId v = 0; v < n; ++v) {
    std::size_t rest = v;
    for (std::size_t i = 0; i < d; ++i) {
      coords[v][i] = static_cast<long>(rest % L);
      rest /= L;
    }
    names[v] = join_underscore(coords[v]);
  }
  std::size_t stride = 1;
  for (std::size_t i = 0; i < d; ++i, stride *= L) {
    for (VertexId v = 0; v < n; ++v) {
      if (coords[v][i] + 1 < static_cast<long>(L)) {
        arcs.push_back({v, v + stride});
        arcs.push_back({v + stride, v});
        nbrs[v].push_back(v + stride);
        nbrs[v + stride].push_back(v);
      }
    }
  }
  Truncation tr{"box {0.." + std::to_string(L - 1) + "}^" + std::to_string(d) + " of Z^" + std::to_string(d),
                deficient_vertices(nbrs, 2 * d)};
  Lattice lat{make_graph(std::move(names), arcs, std::move(tr)), {}};
  const DirectedGraph& g = *lat.graph;
  lat.direction.resize(g.num_arcs());
  for (ArcId a = 0; a < g.num_arcs(); ++a) {
    for (std::size_t i = 0; i < d; ++i) {
      long diff = coords[g.arc(a).dst][i] - coords[g.arc(a).src][i];
      if (diff == 1) lat.direction[a] = 2 * i;
      if (diff == -1) lat.direction[a] = 2 * i + 1;
    }
  }
  return lat;
}

// Axial generators g1 = (1,0), g2 = (-1,1), g3 = (0,-1) and their inverses.
constexpr long kTriSteps[6][2] = {{1, 0}, {-1, 0}, {-1, 1}, {1, -1}, {0, -1}, {0, 1}};

Lattice tri_lattice(std::size_t L) {
  if (L < 5) throw DomainError("triangular lattice side must be >= 5");
  const std::size_t n = L * L;
  std::vector<std::string> names(n);
  std::vector<std::vector<VertexId>> nbrs(n);
  std::vector<Arc> arcs;
  for (VertexId v = 0; v < n; ++v) {
    long q = static_cast<long>(v % L);
    long r = static_cast<long>(v / L);
    names[v] = join_underscore({q, r});
    for (const auto& s : kTriSteps) {
      long q2 = q + s[0];
      long r2 = r + s[1];
      if (q2 < 0 || r2 < 0 || q2 >= static_cast<long>(L) || r2 >= static_cast<long>(L)) continue;
      VertexId w = static_cast<VertexId>(q2) + L * static_cast<VertexId>(r2);
      arcs.push_back({v, w});
      nbrs[v].push_back(w);
    }
  }
  Truncation tr{"rhombus {0.." + std::to_string(L - 1) + "}^2 of the triangular lattice", deficient_vertices(nbrs, 6)};
  Lattice lat{make_graph(std::move(names), arcs, std::move(tr)), {}};
  const DirectedGraph& g = *lat.graph;
  lat.direction.resize(g.num_arcs());
  for (ArcId a = 0; a < g.num_arcs(); ++a) {
    long dq = static_cast<long>(g.arc(a).dst % L) - static_cast<long>(g.arc(a).src % L);
    long dr = static_cast<long>(g.arc(a).dst / L) - static_cast<long>(g.arc(a).src / L);
    for (std::size_t i = 0; i < 6; ++i) {
      if (kTriSteps[i][0] == dq && kTriSteps[i][1] == dr) lat.direction[a] = i;
    }
  }
  return lat;
}

IntensitySpec lattice_intensity(const Lattice& lat, const std::vector<double>& rates) {
  std::vector<double> per_arc(lat.direction.size());
  for (ArcId a = 0; a < per_arc.size(); ++a) per_arc[a] = rates[lat.direction[a]];
  return IntensitySpec::constant(lat.graph, std::move(per_arc));
}

std::function<double(const ClosedWalk&)> product_along(GraphPtr g, std::function<double(ArcId)> rate) {
  return [g, rate](const ClosedWalk& c) {
    double p = 1.0;
    for (ArcId a : walk_arcs(*g, c.walk())) p *= rate(a);
    return p;
  };
}

void check_positive(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(std::string(what) + " must be positive");
  }
}

}  // namespace

GraphPtr birth_death_graph(std::size_t N) {
  if (N < 2) throw DomainError("birth-death truncation level must be >= 2");
  std::vector<std::string> names;
  std::vector<Arc> arcs;
  for (std::size_t z = 0; z <= N; ++z) names.push_back(std::to_string(z));
  for (std::size_t z = 0; z < N; ++z) {
    arcs.push_back({z, z + 1});
    arcs.push_back({z + 1, z});
  }
  return make_graph(std::move(names), arcs, Truncation{"levels {0.." + std::to_string(N) + "} of N", {N}});
}

GraphPtr hypercube_graph(std::size_t d) {
  if (d < 1 || d > 10) throw DomainError("hypercube dimension must lie in [1, 10]");
  const std::size_t n = std::size_t{1} << d;
  std::vector<std::string> names(n);
  std::vector<Arc> arcs;
  for (VertexId v = 0; v < n; ++v) {
    names[v].resize(d);
    for (std::size_t i = 0; i < d; ++i) names[v][i] = ((v >> i) & 1U) ? '1' : '0';
    for (std::size_t i = 0; i < d; ++i) arcs.push_back({v, v ^ (std::size_t{1} << i)});
  }
  return make_graph(std::move(names), arcs);
}

GraphPtr zd_box_graph(std::size_t d, std::size_t L) { return zd_lattice(d, L).graph; }

GraphPtr triangular_lattice_graph(std::size_t L) { return tri_lattice(L).graph; }

GraphPtr complete_graph(std::size_t n) {
  if (n < 2) throw DomainError("complete graph needs at least 2 vertices");
  std::vector<std::string> names;
  std::vector<Arc> arcs;
  for (std::size_t i = 0; i < n; ++i) names.push_back(std::to_string(i));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (i != k) arcs.push_back({i, k});
    }
  }
  return make_graph(std::move(names), arcs);
}

PresetDescriptor birth_death(double lambda, double mu, std::size_t N) {
  check_positive({lambda, mu}, "birth-death rates");
  GraphPtr g = birth_death_graph(N);
  std::vector<double> rates(g->num_arcs());
  for (ArcId a = 0; a < g->num_arcs(); ++a) rates[a] = g->arc(a).dst > g->arc(a).src ? lambda : mu;
  PresetDescriptor p{"birth_death", {{"lambda", lambda}, {"mu", mu}, {"N", static_cast<double>(N)}}, g,
                     IntensitySpec::constant(g, rates)};
  auto total = [=](VertexId z) { return (z < N ? lambda : 0.0) + (z > 0 ? mu : 0.0); };
  p.chi_arc = [g, total](ArcId a) { return total(g->arc(a).dst) - total(g->arc(a).src); };
  p.chi_cycle = product_along(g, [g, lambda, mu](ArcId a) { return g->arc(a).dst > g->arc(a).src ? lambda : mu; });
  return p;
}

PresetDescriptor hypercube(const std::vector<double>& rates) {
  check_positive(rates, "hypercube rates");
  const std::size_t d = rates.size();
  GraphPtr g = hypercube_graph(d);
  auto direction = [g](ArcId a) {
    return static_cast<std::size_t>(std::countr_zero(g->arc(a).src ^ g->arc(a).dst));
  };
  std::vector<double> per_arc(g->num_arcs());
  for (ArcId a = 0; a < g->num_arcs(); ++a) per_arc[a] = rates[direction(a)];
  PresetDescriptor p{"hypercube", {{"d", static_cast<double>(d)}}, g, IntensitySpec::constant(g, per_arc)};
  p.chi_arc = [](ArcId) { return 0.0; };
  p.chi_cycle = product_along(g, [rates, direction](ArcId a) { return rates[direction(a)]; });
  // Coordinates are independent two-state chains; u_i(w) = P(coordinate i ends at y_i).
  auto coord_u = [rates](std::size_t i, bool differs, double s) {
    double e = std::exp(-2.0 * rates[i] * s);
    return differs ? 0.5 * (1.0 - e) : 0.5 * (1.0 + e);
  };
  p.bridge_rate = [g, rates, direction, coord_u](double t, ArcId a, VertexId y) {
    std::size_t i = direction(a);
    bool differs = ((g->arc(a).src ^ y) >> i) & 1U;
    double s = 1.0 - t;
    return rates[i] * coord_u(i, !differs, s) / coord_u(i, differs, s);
  };
  p.potential = [rates](double s, VertexId z, VertexId y) {
    double psi = 0.0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
      const double x = -2.0 * rates[i] * s;
      // log(1 - e^x) through expm1 keeps relative accuracy as t -> 1
      psi += (((z ^ y) >> i) & 1U) ? std::log(-std::expm1(x)) : std::log1p(std::exp(x));
    }
    return psi;
  };
  return p;
}

PresetDescriptor hypercube(std::size_t d) { return hypercube(std::vector<double>(d, 1.0)); }

PresetDescriptor triangle() {
  GraphPtr g = make_graph({"a", "b", "c"}, {{0, 1}, {1, 0}, {0, 2}, {2, 0}, {1, 2}, {2, 1}});
  PresetDescriptor p{"triangle", {}, g, IntensitySpec::constant(g, 1.0)};
  p.tree_edges = {{0, 1}, {1, 2}};
  p.tree_root = 0;
  p.chi_arc = [](ArcId) { return 0.0; };
  p.chi_cycle = [](const ClosedWalk&) { return 1.0; };
  return p;
}

PresetDescriptor two_cycle(double a_to_b, double b_to_a) {
  check_positive({a_to_b, b_to_a}, "two-cycle rates");
  GraphPtr g = make_graph({"a", "b"}, {{0, 1}, {1, 0}});
  PresetDescriptor p{"two_cycle", {{"a", a_to_b}, {"b", b_to_a}}, g, IntensitySpec::constant(g, {a_to_b, b_to_a})};
  p.chi_arc = [=](ArcId a) { return a == 0 ? b_to_a - a_to_b : a_to_b - b_to_a; };
  p.chi_cycle = product_along(g, [=](ArcId a) { return a == 0 ? a_to_b : b_to_a; });
  return p;
}

PresetDescriptor complete_graph_sampler(const std::vector<double>& m) {
  if (m.size() < 2) throw DomainError("complete graph sampler needs at least 2 weights");
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!(m[i] > 0.0)) throw DomainError("weight m[" + std::to_string(i) + "] is not positive");
  }
  double total = std::accumulate(m.begin(), m.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) throw DomainError("weights must sum to 1");
  GraphPtr g = complete_graph(m.size());
  std::vector<double> rates(g->num_arcs());
  for (ArcId a = 0; a < g->num_arcs(); ++a) rates[a] = std::sqrt(m[g->arc(a).dst] / m[g->arc(a).src]);
  PresetDescriptor p{"complete_graph", {}, g, IntensitySpec::constant(g, rates)};
  for (std::size_t i = 0; i < m.size(); ++i) p.params["m" + std::to_string(i)] = m[i];
  double root_sum = 0.0;
  for (double w : m) root_sum += std::sqrt(w);
  p.chi_arc = [g, m, root_sum](ArcId a) {
    return root_sum * (1.0 / std::sqrt(m[g->arc(a).dst]) - 1.0 / std::sqrt(m[g->arc(a).src]));
  };
  p.chi_cycle = [](const ClosedWalk&) { return 1.0; };
  return p;
}

PresetDescriptor cayley_zd(std::size_t d, const std::vector<double>& rates, std::size_t L) {
  if (rates.size() != 2 * d) throw DomainError("Z^d preset needs 2d rates");
  check_positive(rates, "Z^d rates");
  Lattice lat = zd_lattice(d, L);
  PresetDescriptor p{"cayley_zd", {{"d", static_cast<double>(d)}, {"L", static_cast<double>(L)}}, lat.graph,
                     lattice_intensity(lat, rates)};
  p.chi_arc = [](ArcId) { return 0.0; };
  auto dir = lat.direction;
  p.chi_cycle = product_along(lat.graph, [dir, rates](ArcId a) { return rates[dir[a]]; });
  return p;
}

PresetDescriptor triangular_lattice_family(const std::vector<double>& j, double alpha, double beta, std::size_t L) {
  if (j.size() != 6) throw DomainError("triangular lattice needs 6 rates");
  check_positive(j, "triangular lattice rates");
  check_positive({alpha, beta}, "alpha and beta");
  std::vector<double> k = {alpha * j[0], j[1] / alpha, beta * j[2], j[3] / beta, j[4] / (alpha * beta),
                           alpha * beta * j[5]};
  Lattice lat = tri_lattice(L);
  PresetDescriptor p{"triangular_lattice",
                     {{"alpha", alpha}, {"beta", beta}, {"L", static_cast<double>(L)}},
                     lat.graph,
                     lattice_intensity(lat, j)};
  p.partner = lattice_intensity(lat, k);
  p.chi_arc = [](ArcId) { return 0.0; };
  auto dir = lat.direction;
  p.chi_cycle = product_along(lat.graph, [dir, j](ArcId a) { return j[dir[a]]; });
  return p;
}

bool zd_product_criterion(const std::vector<double>& j, const std::vector<double>& k, double rel_tol) {
  if (j.size() != k.size() || j.size() % 2 != 0) throw DomainError("rate vectors must have equal even length");
  for (std::size_t i = 0; i < j.size(); i += 2) {
    if (std::abs(j[i] * j[i + 1] / (k[i] * k[i + 1]) - 1.0) > rel_tol) return false;
  }
  return true;
}

bool hypercube_cayley_rigidity(const std::vector<double>& j, const std::vector<double>& k, double rel_tol) {
  if (j.size() != k.size()) throw DomainError("rate vectors must have equal length");
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (std::abs(j[i] / k[i] - 1.0) > rel_tol) return false;
  }
  return true;
}

SpanningTree preset_tree(const PresetDescriptor& p) {
  if (!p.tree_edges.empty()) return tree_from_edges(*p.graph, p.tree_root, p.tree_edges);
  return spanning_tree(*p.graph, default_root(*p.graph));
}

namespace {

double get_number(const std::map<std::string, std::string>& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  try {
    std::size_t used = 0;
    double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw DomainError("parameter '" + key + "' is not a number: " + it->second);
  }
}

std::size_t get_size(const std::map<std::string, std::string>& params, const std::string& key, std::size_t fallback) {
  double v = get_number(params, key, static_cast<double>(fallback));
  if (!(v >= 0.0) || v != std::floor(v)) throw DomainError("parameter '" + key + "' must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

std::vector<double> get_list(const std::map<std::string, std::string>& params, const std::string& key,
                             std::vector<double> fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ':')) {
    out.push_back(get_number({{key, item}}, key, 0.0));
  }
  return out;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"birth_death", "hypercube", "triangle", "two_cycle", "complete_graph", "cayley_zd", "triangular_lattice"};
}

PresetDescriptor preset_by_name(const std::string& name, const std::map<std::string, std::string>& params) {
  static const std::map<std::string, std::vector<std::string>> known = {
      {"birth_death", {"lambda", "mu", "N"}},
      {"hypercube", {"d", "rates"}},
      {"triangle", {}},
      {"two_cycle", {"a", "b"}},
      {"complete_graph", {"m"}},
      {"cayley_zd", {"d", "L", "rates"}},
      {"triangular_lattice", {"alpha", "beta", "L", "j"}},
  };
  auto it = known.find(name);
  if (it == known.end()) throw DomainError("unknown preset '" + name + "'");
  for (const auto& [key, value] : params) {
    if (std::find(it->second.begin(), it->second.end(), key) == it->second.end()) {
      throw DomainError("preset '" + name + "' has no parameter '" + key + "'");
    }
  }
  if (name == "birth_death") {
    return birth_death(get_number(params, "lambda", 1.0), get_number(params, "mu", 1.0), get_size(params, "N", 20));
  }
  if (name == "hypercube") {
    std::size_t d = get_size(params, "d", 3);
    std::vector<double> rates = get_list(params, "rates", std::vector<double>(d, 1.0));
    if (rates.size() != d) throw DomainError("parameter 'rates' must have d entries");
    return hypercube(rates);
  }
  if (name == "triangle") return triangle();
  if (name == "two_cycle") return two_cycle(get_number(params, "a", 1.0), get_number(params, "b", 1.0));
  if (name == "complete_graph") return complete_graph_sampler(get_list(params, "m", {0.4, 0.3, 0.2, 0.1}));
  if (name == "cayley_zd") {
    std::size_t d = get_size(params, "d", 1);
    return cayley_zd(d, get_list(params, "rates", std::vector<double>(2 * d, 1.0)), get_size(params, "L", 9));
  }
  return triangular_lattice_family(get_list(params, "j", std::vector<double>(6, 1.0)), get_number(params, "alpha", 1.0),
                                   get_number(params, "beta", 1.0), get_size(params, "L", 7));
}

}  // namespace recip
