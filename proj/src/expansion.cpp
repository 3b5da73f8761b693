#include "recip/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "recip/bridge.hpp"
#include "recip/error.hpp"
#include "recip/quadrature.hpp"

namespace recip {

namespace {

void check_window(const Intensity& j, double t, double h) {
  if (!(h >= 0.0)) throw DomainError("h must be non-negative");
  check_time(t, j.t_min(), j.t_max());
  if (!(t + h < 1.0) || t + h > j.t_max()) throw DomainError("t + h must stay below the end of the time domain");
}

// int_0^r jbar(t + s, z) ds
class Hazard {
 public:
  Hazard(const Intensity& j, double t, VertexId z) : j_(&j), t_(t), z_(z) {
    if (j.is_time_homogeneous()) rate_ = j.total_rate(t, z);
  }
  double operator()(double r) const {
    if (r <= 0.0) return 0.0;
    if (rate_) return *rate_ * r;
    return integrate_adaptive([&](double s) { return j_->total_rate(t_ + s, z_); }, 0.0, r, 1e-13);
  }

 private:
  const Intensity* j_;
  double t_;
  VertexId z_;
  std::optional<double> rate_;
};

// Cubic Hermite table of r -> int_0^r jbar(t + s, z) ds on [0, h].
class HazardTable {
 public:
  HazardTable(const Intensity& j, double t, double h, VertexId z, std::size_t panels = 64) : h_(h) {
    if (j.is_time_homogeneous() || h == 0.0) {
      rate_ = j.total_rate(t, z);
      return;
    }
    n_ = panels;
    val_.assign(n_ + 1, 0.0);
    der_.assign(n_ + 1, 0.0);
    const double dr = h / static_cast<double>(n_);
    auto jbar = [&](double s) { return j.total_rate(t + s, z); };
    der_[0] = jbar(0.0);
    for (std::size_t i = 1; i <= n_; ++i) {
      const double a = dr * static_cast<double>(i - 1);
      const double b = dr * static_cast<double>(i);
      val_[i] = val_[i - 1] + gl32(jbar, a, b);
      der_[i] = jbar(b);
    }
  }
  double operator()(double r) const {
    if (rate_) return *rate_ * r;
    const double dr = h_ / static_cast<double>(n_);
    const double x = std::clamp(r / dr, 0.0, static_cast<double>(n_));
    const std::size_t i = std::min(static_cast<std::size_t>(x), n_ - 1);
    const double s = x - static_cast<double>(i);
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * val_[i] + (s3 - 2 * s2 + s) * dr * der_[i] + (-2 * s3 + 3 * s2) * val_[i + 1] +
           (s3 - s2) * dr * der_[i + 1];
  }

 private:
  double h_;
  std::optional<double> rate_;
  std::size_t n_ = 0;
  std::vector<double> val_;
  std::vector<double> der_;
};

}  // namespace

ArcProbability exact_arc_probability(const Intensity& j, double t, double h, ArcId arc, double tau) {
  check_window(j, t, h);
  if (!(tau > 0.0 && tau <= 1.0)) throw DomainError("tau must lie in (0, 1]");
  const DirectedGraph& g = j.graph();
  if (arc >= g.num_arcs()) throw DomainError("arc out of range");
  if (h == 0.0) return {0.0, 0.0};
  const VertexId z = g.arc(arc).src;
  const VertexId w = g.arc(arc).dst;
  const Hazard Hz(j, t, z);
  const Hazard Hw(j, t, w);
  const double Hw_h = Hw(h);
  auto integrand = [&](double r) { return j.rate(t + r, arc) * std::exp(-Hz(r) - (Hw_h - Hw(r))); };
  ArcProbability p;
  p.numerator = integrate_adaptive(integrand, 0.0, tau * h);
  p.denominator = tau == 1.0 ? p.numerator : p.numerator + integrate_adaptive(integrand, tau * h, h);
  return p;
}

double exact_cycle_probability(const Intensity& j, double t, double h, const ClosedWalk& c) {
  check_window(j, t, h);
  const DirectedGraph& g = j.graph();
  validate_walk(g, c.walk());
  const std::size_t n = c.length();
  if (n > 4) throw DomainError("exact cycle probabilities support closed walks of length <= 4");
  if (h == 0.0) return 0.0;
  const std::vector<VertexId>& v = c.vertices();
  const std::vector<ArcId> arcs = walk_arcs(g, c.walk());
  std::vector<HazardTable> H;
  H.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) H.emplace_back(j, t, h, v[i]);
  const GaussLegendre32& rule = gauss_legendre_32();
  // F(i, s): probability of following the rest of the walk from v[i], entered at t + s
  std::function<double(std::size_t, double)> F = [&](std::size_t i, double s) -> double {
    if (i == n) return std::exp(-(H[n](h) - H[n](s)));
    const double half = 0.5 * (h - s);
    const double mid = 0.5 * (h + s);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double r = mid + half * rule.nodes[q];
      acc += rule.weights[q] * std::exp(-(H[i](r) - H[i](s))) * j.rate(t + r, arcs[i]) * F(i + 1, r);
    }
    return acc * half;
  };
  return F(0, 0.0);
}

double exact_cycle_probability_literal(const Intensity& j, double t, double h, const ClosedWalk& c) {
  const double p = exact_cycle_probability(j, t, h, c);
  if (h == 0.0) return p;
  const Propagator method = j.is_time_homogeneous() ? Propagator::expm : Propagator::rk4;
  const TransitionMatrix M = transition_matrix(j, t, t + h, method, method == Propagator::rk4 ? h / 4096.0 : 0.0);
  return p / M.m(c.start(), c.start());
}

std::vector<double> default_h_grid() { return {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}; }

void check_h_grid(const std::vector<double>& hs, double t) {
  if (hs.empty()) throw DomainError("h grid is empty");
  for (std::size_t i = 0; i < hs.size(); ++i) {
    if (!(hs[i] > 0.0 && hs[i] < 1.0 - t)) throw DomainError("h grid values must lie in (0, 1 - t)");
    if (i > 0 && !(hs[i] < hs[i - 1])) throw DomainError("h grid must be strictly decreasing");
  }
}

ExpansionProbe probe_arc(const Intensity& j, double t, ArcId arc, std::vector<double> hs, double tau) {
  check_h_grid(hs, t);
  ExpansionProbe p{t, std::move(hs), arc, tau, {}, {}};
  for (double h : p.hs) {
    const double r = exact_arc_probability(j, t, h, arc, tau).ratio();
    p.exact.push_back(r);
    p.scaled.push_back(r);
  }
  return p;
}

ExpansionProbe probe_cycle(const Intensity& j, double t, const ClosedWalk& c, std::vector<double> hs) {
  check_h_grid(hs, t);
  ExpansionProbe p{t, std::move(hs), c, 0.5, {}, {}};
  const auto n = static_cast<double>(c.length());
  const double fact = std::tgamma(n + 1.0);
  for (double h : p.hs) {
    const double v = exact_cycle_probability(j, t, h, c);
    p.exact.push_back(v);
    p.scaled.push_back(v * fact / std::pow(h, n));
  }
  return p;
}

FitResult fit_characteristic(const ExpansionProbe& probe, const FitOptions& opt) {
  const std::size_t m = opt.points;
  if (m < 3 || probe.hs.size() < m || probe.scaled.size() != probe.hs.size()) {
    throw DomainError("fit needs at least 3 h values");
  }
  const std::size_t first = probe.hs.size() - m;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = first; i < probe.hs.size(); ++i) {
    const double x = probe.hs[i];
    const double y = probe.scaled[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double md = static_cast<double>(m);
  FitResult f;
  f.slope = (md * sxy - sx * sy) / (md * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / md;
  for (std::size_t i = first; i < probe.hs.size(); ++i) {
    f.max_residual = std::max(f.max_residual, std::abs(probe.scaled[i] - f.intercept - f.slope * probe.hs[i]));
  }
  const bool is_arc = std::holds_alternative<ArcId>(probe.target);
  const double scale = is_arc ? 1.0 : std::max(std::abs(f.intercept), 1e-300);
  if (f.max_residual > opt.tolerance * scale) {
    throw NumericalError("fit residual " + std::to_string(f.max_residual) + " above tolerance; shrink h");
  }
  if (is_arc) {
    if (std::abs(f.intercept - probe.tau) > opt.tolerance) {
      throw NumericalError("arc intercept " + std::to_string(f.intercept) + " is not close to tau");
    }
    f.estimate = -8.0 * f.slope;
  } else {
    f.estimate = f.intercept;
  }
  return f;
}

double richardson(double f_h, double f_h2, int order) {
  const double p = std::ldexp(1.0, order);
  return (p * f_h2 - f_h) / (p - 1.0);
}

McCheck mc_expansion_check(const Intensity& j, double t, double h, const ExpansionTarget& target, std::size_t N,
                           std::uint64_t seed, std::size_t threads, double tau) {
  if (N < 1000) throw DomainError("Monte Carlo check needs N >= 1000");
  check_window(j, t, h);
  if (!(h > 0.0)) throw DomainError("h must be positive");
  const DirectedGraph& g = j.graph();
  McCheck out;
  VertexId start = 0;
  std::function<bool(const PathSample&)> condition;
  std::function<bool(const PathSample&)> event;
  if (const ArcId* arc = std::get_if<ArcId>(&target)) {
    if (*arc >= g.num_arcs()) throw DomainError("arc out of range");
    start = g.arc(*arc).src;
    const VertexId w = g.arc(*arc).dst;
    const double cut = t + tau * h;
    condition = [w](const PathSample& p) { return p.jumps.size() == 1 && p.jumps[0].second == w; };
    event = [cut](const PathSample& p) { return p.jumps[0].first <= cut; };
    out.oracle = exact_arc_probability(j, t, h, *arc, tau).ratio();
  } else {
    const ClosedWalk& c = std::get<ClosedWalk>(target);
    start = c.start();
    const std::vector<VertexId> vs = c.vertices();
    condition = [start](const PathSample& p) { return p.final_state() == start; };
    event = [vs](const PathSample& p) {
      if (p.jumps.size() + 1 != vs.size()) return false;
      for (std::size_t i = 0; i < p.jumps.size(); ++i) {
        if (p.jumps[i].second != vs[i + 1]) return false;
      }
      return true;
    };
    out.oracle = exact_cycle_probability_literal(j, t, h, c);
  }
  PathSampler sampler(j);
  const CounterRng root(seed);
  const std::size_t nthreads = std::max<std::size_t>(1, std::min(resolve_threads(threads), N));
  std::vector<std::size_t> hits(nthreads, 0);
  std::vector<std::size_t> trials(nthreads, 0);
  parallel_chunks(N, nthreads, [&](std::size_t b, std::size_t e, std::size_t chunk) {
    for (std::size_t i = b; i < e; ++i) {
      CounterRng rng = root.split(i);
      const PathSample p = sampler.sample(start, rng, t, t + h);
      if (!condition(p)) continue;
      ++trials[chunk];
      if (event(p)) ++hits[chunk];
    }
  });
  std::size_t H = 0, T = 0;
  for (std::size_t c = 0; c < nthreads; ++c) {
    H += hits[c];
    T += trials[c];
  }
  if (T == 0) throw DomainError("conditioning event unobserved");
  out.mc = wilson(H, T);
  out.consistent = out.mc.covers(out.oracle);
  return out;
}

}  // namespace recip
