#include "recip/characteristics.hpp"

#include <algorithm>
#include <cmath>

#include "recip/error.hpp"
#include "recip/presets.hpp"

namespace recip {

namespace {

struct Snapshot {
  std::vector<double> rates;
  std::vector<double> dlog;
  std::vector<double> totals;
};

Snapshot snapshot(const Intensity& k, double t) {
  Snapshot s;
  s.rates = k.rates(t);
  s.dlog = k.dlog_rates(t);
  s.totals = k.totals(s.rates);
  return s;
}

double chi_from(const DirectedGraph& g, const Snapshot& s, ArcId a) {
  return s.dlog[a] + s.totals[g.arc(a).dst] - s.totals[g.arc(a).src];
}

bool walk_interior(const DirectedGraph& g, const ClosedWalk& c, std::size_t margin) {
  return std::all_of(c.vertices().begin(), c.vertices().end(),
                     [&](VertexId v) { return g.is_interior(v, margin); });
}

void note(ClassReport& r, double t, const std::string& what) {
  if (!r.violation_time) {
    r.violation_time = t;
    r.violation_object = what;
  }
}

ClassReport compare(const Intensity& j, const Intensity& k, std::span<const ArcId> arcs,
                    std::span<const ClosedWalk> cycles, std::span<const double> grid, Tolerances tol) {
  const DirectedGraph& g = j.graph();
  if (!(g == k.graph())) throw DomainError("intensities live on different graphs");
  ClassReport r;
  r.arcs_checked = arcs.size();
  r.cycles_checked = cycles.size();
  for (double t : grid) {
    Snapshot sj = snapshot(j, t);
    Snapshot sk = snapshot(k, t);
    for (ArcId a : arcs) {
      double res = std::abs(chi_from(g, sj, a) - chi_from(g, sk, a));
      r.max_arc_residual = std::max(r.max_arc_residual, res);
      if (!(res <= tol.arc)) note(r, t, "arc " + g.arc_label(a));
    }
    for (const ClosedWalk& c : cycles) {
      double res = std::abs(std::expm1(log_chi_cycle(g, sj.rates, c) - log_chi_cycle(g, sk.rates, c)));
      r.max_cycle_residual = std::max(r.max_cycle_residual, res);
      if (!(res <= tol.cycle)) note(r, t, "cycle " + walk_label(g, c.walk()));
    }
  }
  r.equal = !r.violation_time.has_value();
  return r;
}

}  // namespace

double chi_arc(const Intensity& k, double t, ArcId a) {
  return chi_from(k.graph(), snapshot(k, t), a);
}

double chi_cycle(const Intensity& k, double t, const ClosedWalk& c) {
  std::vector<double> r = k.rates(t);
  double p = 1.0;
  for (ArcId a : walk_arcs(k.graph(), c.walk())) p *= r[a];
  return p;
}

std::vector<double> chi_arc_all(const Intensity& k, double t) {
  Snapshot s = snapshot(k, t);
  std::vector<double> out(k.graph().num_arcs());
  for (ArcId a = 0; a < out.size(); ++a) out[a] = chi_from(k.graph(), s, a);
  return out;
}

double log_chi_cycle(const DirectedGraph& g, std::span<const double> rates, const ClosedWalk& c) {
  double s = 0.0;
  for (ArcId a : walk_arcs(g, c.walk())) s += std::log(rates[a]);
  return s;
}

std::vector<double> default_time_grid(std::size_t n, double delta) {
  if (n < 2) throw DomainError("time grid needs at least 2 points");
  if (!(delta >= 0.0 && delta < 0.5)) throw DomainError("delta must lie in [0, 0.5)");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = delta + (1.0 - 2.0 * delta) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return g;
}

Tolerances default_tolerances(const Intensity& j, const Intensity& k) {
  if (j.is_analytic() && k.is_analytic()) return {1e-6, 1e-9};
  return {1e-3, 1e-6};
}

VertexId default_root(const DirectedGraph& g) {
  if (!g.is_truncated()) return 0;
  VertexId best = 0;
  for (VertexId v = 1; v < g.num_vertices(); ++v) {
    if (g.boundary_distance(v) > g.boundary_distance(best)) best = v;
  }
  return best;
}

ClassCheck default_class_check(const Intensity& j, const Intensity& k) {
  const DirectedGraph& g = j.graph();
  ClassCheck c{spanning_tree(g, default_root(g)), {}, default_time_grid(), default_tolerances(j, k), 2};
  c.basis = t_basis(g, c.tree);
  return c;
}

ClassReport same_class(const Intensity& j, const Intensity& k, const ClassCheck& check) {
  const DirectedGraph& g = j.graph();
  std::vector<ArcId> arcs;
  for (ArcId a : check.tree.tree_arcs()) {
    if (g.is_interior_arc(a, check.margin)) arcs.push_back(a);
  }
  std::vector<ClosedWalk> cycles;
  for (const ClosedWalk& c : check.basis.all()) {
    if (walk_interior(g, c, check.margin)) cycles.push_back(c);
  }
  return compare(j, k, arcs, cycles, check.grid, check.tol);
}

ClassReport same_class(const Intensity& j, const Intensity& k) {
  return same_class(j, k, default_class_check(j, k));
}

ClassReport same_class_exhaustive(const Intensity& j, const Intensity& k, std::size_t max_length,
                                  std::span<const double> grid, Tolerances tol, std::size_t margin) {
  const DirectedGraph& g = j.graph();
  std::vector<ArcId> arcs;
  for (ArcId a = 0; a < g.num_arcs(); ++a) {
    if (g.is_interior_arc(a, margin)) arcs.push_back(a);
  }
  std::vector<ClosedWalk> cycles;
  for (ClosedWalk& c : enumerate_closed_walks(g, max_length)) {
    if (walk_interior(g, c, margin)) cycles.push_back(std::move(c));
  }
  return compare(j, k, arcs, cycles, grid, tol);
}

BirthDeathFamily birth_death_family_rates(double lambda, double mu, double lambda0, std::size_t N) {
  if (!(lambda > 0.0 && mu > 0.0 && lambda0 > 0.0)) throw DomainError("birth-death rates must be positive");
  if (N < 2) throw DomainError("birth-death truncation level must be >= 2");
  BirthDeathFamily f;
  f.birth.push_back(lambda0);
  for (std::size_t z = 0; z < N; ++z) {
    double d = lambda * mu / f.birth.back();
    f.death.push_back(d);
    if (z + 1 < N) {
      double b = mu + lambda0 - d;
      if (!(b > 0.0) || !std::isfinite(b)) {
        throw DomainError("birth-death family leaves the positive cone at level " + std::to_string(z + 1) +
                          " (lambda0 too small)");
      }
      f.birth.push_back(b);
    }
  }
  return f;
}

IntensitySpec markov_family_birth_death(double lambda, double mu, double lambda0, std::size_t N) {
  BirthDeathFamily f = birth_death_family_rates(lambda, mu, lambda0, N);
  GraphPtr g = birth_death_graph(N);
  std::vector<double> rates(g->num_arcs());
  for (ArcId a = 0; a < g->num_arcs(); ++a) {
    VertexId s = g->arc(a).src;
    VertexId d = g->arc(a).dst;
    rates[a] = d == s + 1 ? f.birth[s] : f.death[s - 1];
  }
  return IntensitySpec::constant(std::move(g), std::move(rates));
}

}  // namespace recip
