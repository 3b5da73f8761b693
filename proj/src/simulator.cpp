#include "recip/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <string>

#include "recip/error.hpp"

namespace recip {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(seed ^ splitmix64(stream * 0xD1B54A32D192ED03ULL))) {}

std::uint64_t CounterRng::next_u64() { return splitmix64(key_ + kGolden * ++counter_); }

double CounterRng::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::exponential() { return -std::log(uniform()); }

CounterRng CounterRng::split(std::uint64_t index) const {
  CounterRng r;
  r.key_ = splitmix64(key_ ^ splitmix64(index ^ 0xA0761D6478BD642FULL));
  return r;
}

VertexId PathSample::state_at(double t) const {
  VertexId z = x0;
  for (const auto& [time, dst] : jumps) {
    if (time > t) break;
    z = dst;
  }
  return z;
}

void validate_path(const DirectedGraph& g, const PathSample& p) {
  VertexId z = p.x0;
  double last = p.t_start;
  for (const auto& [time, dst] : p.jumps) {
    if (!(time > last) || time > p.t_end) throw DomainError("jump times are not strictly increasing inside the window");
    if (!g.find_arc(z, dst)) throw DomainError("jump " + g.name(z) + "->" + g.name(dst) + " is not an arc");
    z = dst;
    last = time;
  }
}

std::vector<double> jump_times_after(const PathSample& p, double t, std::size_t m) {
  std::vector<double> out;
  for (const auto& [time, dst] : p.jumps) {
    if (out.size() == m) break;
    if (time > t) out.push_back(time);
  }
  out.resize(m, std::numeric_limits<double>::infinity());
  return out;
}

// ---------------------------------------------------------------------------

PathSampler::PathSampler(const Intensity& k, SamplerKind kind) : k_(&k), kind_(kind), bound_(k.rate_bound()) {
  if (kind_ == SamplerKind::automatic) {
    kind_ = k.is_time_homogeneous() ? SamplerKind::exponential_race : SamplerKind::thinning;
  }
  if (kind_ == SamplerKind::exponential_race) {
    if (!k.is_time_homogeneous()) throw DomainError("exponential races need a time-homogeneous intensity");
    rates_ = k.rates(k.t_min());
    totals_ = k.totals(rates_);
  }
  if (!(bound_ > 0.0) || !std::isfinite(bound_)) throw DomainError("intensity has no finite positive rate bound");
}

VertexId PathSampler::route(VertexId z, std::span<const double> rates, double total, CounterRng& rng) const {
  const DirectedGraph& g = k_->graph();
  double u = rng.uniform() * total;
  auto out = g.out_arcs(z);
  for (ArcId a : out) {
    u -= rates[a];
    if (u < 0.0) return g.arc(a).dst;
  }
  return g.arc(out.back()).dst;
}

PathSample PathSampler::sample(VertexId x0, CounterRng& rng, double t_start, double t_end) const {
  check_time(t_start, k_->t_min(), k_->t_max());
  check_time(t_end, t_start, k_->t_max());
  const DirectedGraph& g = k_->graph();
  if (x0 >= g.num_vertices()) throw DomainError("start vertex out of range");
  PathSample p{x0, {}, t_start, t_end};
  const double cap = 10.0 * bound_ + 100.0;
  VertexId z = x0;
  double t = t_start;
  std::vector<double> r(g.num_arcs());
  while (true) {
    double total = 0.0;
    if (kind_ == SamplerKind::exponential_race) {
      t += rng.exponential() / totals_[z];
      if (t >= t_end) break;
      total = totals_[z];
      z = route(z, rates_, total, rng);
    } else {
      t += rng.exponential() / bound_;
      if (t >= t_end) break;
      k_->rates_at(t, r);
      for (ArcId a : g.out_arcs(z)) total += r[a];
      if (total > bound_ * (1.0 + 1e-12)) throw NumericalError("total rate exceeds the stored rate bound");
      if (rng.uniform() * bound_ >= total) continue;
      z = route(z, r, total, rng);
    }
    p.jumps.emplace_back(t, z);
    if (static_cast<double>(p.jumps.size()) > cap) throw NumericalError("jump count exceeded 10 * rate bound + 100");
  }
  return p;
}

PathSample sample_path(const Intensity& k, VertexId x0, std::uint64_t seed, double t_start, double t_end) {
  CounterRng rng(seed);
  return PathSampler(k).sample(x0, rng, t_start, t_end);
}

// ---------------------------------------------------------------------------

BridgeSampler::BridgeSampler(const BridgeSolution& sol)
    : sol_(&sol), n_(sol.graph().num_vertices()), cutoff_(1.0 - sol.delta()) {
  const Intensity& j = sol.reference();
  last_node_ = 0;
  while (last_node_ + 1 < sol.num_nodes() && sol.node_time(last_node_ + 1) <= cutoff_) ++last_node_;
  const std::size_t nodes = last_node_ + 1;
  J_.assign(nodes * n_, 0.0);
  lambda_.assign(nodes * n_, 0.0);
  std::vector<double> prev_tot = j.totals(j.rates(0.0));
  for (std::size_t k = 1; k < nodes; ++k) {
    const double a = sol.node_time(k - 1);
    const double b = sol.node_time(k);
    std::vector<double> mid_tot = j.totals(j.rates(0.5 * (a + b)));
    std::vector<double> tot = j.totals(j.rates(b));
    for (VertexId z = 0; z < n_; ++z) {
      J_[k * n_ + z] = J_[(k - 1) * n_ + z] + (b - a) / 6.0 * (prev_tot[z] + 4.0 * mid_tot[z] + tot[z]);
    }
    prev_tot = std::move(tot);
  }
  for (std::size_t k = 0; k < nodes; ++k) {
    auto u = sol.scaled_u(k);
    for (VertexId z = 0; z < n_; ++z) {
      lambda_[k * n_ + z] = J_[k * n_ + z] - std::log(u[z]) - sol.log_scale(k);
    }
  }
  frozen_ = j.rates(cutoff_);
  prepare_terminal();
  cutoff_hazard_.resize(n_);
  for (VertexId z = 0; z < n_; ++z) cutoff_hazard_[z] = hazard(z, cutoff_);
}

double BridgeSampler::hazard(VertexId z, double t) const {
  const Intensity& j = sol_->reference();
  // node at or before t
  std::size_t k = 0;
  {
    std::size_t lo = 0;
    std::size_t hi = last_node_;
    while (lo < hi) {
      std::size_t mid = (lo + hi + 1) / 2;
      if (sol_->node_time(mid) <= t) lo = mid; else hi = mid - 1;
    }
    k = lo;
  }
  const double a = sol_->node_time(k);
  double J = J_[k * n_ + z];
  if (t > a) {
    if (j.is_time_homogeneous()) {
      J += j.total_rate(a, z) * (t - a);
    } else {
      J += (t - a) / 6.0 * (j.total_rate(a, z) + 4.0 * j.total_rate(0.5 * (a + t), z) + j.total_rate(t, z));
    }
  }
  double c = 0.0;
  std::vector<double> u = sol_->scaled_u_at(t, &c);
  return J - std::log(u[z]) - c;
}

void BridgeSampler::prepare_terminal() {
  const DirectedGraph& g = sol_->graph();
  const double tau = 1.0 - cutoff_;
  tot_.assign(n_, 0.0);
  for (ArcId a = 0; a < g.num_arcs(); ++a) tot_[g.arc(a).src] += frozen_[a];
  omega_ = *std::max_element(tot_.begin(), tot_.end());
  const double mean = omega_ * tau;
  // P = I + Q / omega; back_[m] = P^m e_y
  auto apply_P = [&](const std::vector<double>& v) {
    std::vector<double> w(n_);
    for (VertexId z = 0; z < n_; ++z) w[z] = (1.0 - tot_[z] / omega_) * v[z];
    for (ArcId a = 0; a < g.num_arcs(); ++a) w[g.arc(a).src] += frozen_[a] / omega_ * v[g.arc(a).dst];
    return w;
  };
  const auto n_max = static_cast<std::size_t>(mean + 12.0 * std::sqrt(mean) + 40.0 +
                                              static_cast<double>(g.num_vertices()));
  back_.assign(1, std::vector<double>(n_, 0.0));
  back_[0][sol_->target()] = 1.0;
  pois_.clear();
  double log_pois = -mean;
  for (std::size_t m = 0; m <= n_max; ++m) {
    if (m > 0) {
      back_.push_back(apply_P(back_.back()));
      log_pois += std::log(mean) - std::log(static_cast<double>(m));
    }
    pois_.push_back(std::exp(log_pois));
  }
}

void BridgeSampler::complete(PathSample& p, VertexId from, CounterRng& rng) const {
  const DirectedGraph& g = sol_->graph();
  const VertexId y = sol_->target();
  const double tau = 1.0 - cutoff_;
  const auto& back = back_;
  const auto& tot = tot_;
  const double omega = omega_;
  std::vector<double> weight(pois_.size());
  for (std::size_t m = 0; m < pois_.size(); ++m) weight[m] = pois_[m] * back[m][from];
  double total = 0.0;
  for (double w : weight) total += w;
  if (!(total > 0.0)) throw NumericalError("terminal bridge segment has zero probability");
  double u = rng.uniform() * total;
  std::size_t count = 0;
  for (; count + 1 < weight.size(); ++count) {
    u -= weight[count];
    if (u < 0.0) break;
  }
  std::vector<double> times(count);
  for (double& t : times) t = cutoff_ + tau * rng.uniform();
  std::sort(times.begin(), times.end());
  VertexId v = from;
  for (std::size_t i = 0; i < count; ++i) {
    const std::vector<double>& b = back[count - i - 1];
    const double stay = (1.0 - tot[v] / omega) * b[v];
    double norm = stay;
    for (ArcId a : g.out_arcs(v)) norm += frozen_[a] / omega * b[g.arc(a).dst];
    double r = rng.uniform() * norm - stay;
    if (r < 0.0) continue;  // virtual jump
    VertexId next = g.arc(g.out_arcs(v).back()).dst;
    for (ArcId a : g.out_arcs(v)) {
      r -= frozen_[a] / omega * b[g.arc(a).dst];
      if (r < 0.0) {
        next = g.arc(a).dst;
        break;
      }
    }
    v = next;
    p.jumps.emplace_back(times[i], v);
  }
  if (v != y) throw NumericalError("terminal bridge segment did not reach the target");
}

PathSample BridgeSampler::sample(CounterRng& rng, bool* at_target_early) const {
  const DirectedGraph& g = sol_->graph();
  PathSample p{sol_->source(), {}, 0.0, 1.0};
  VertexId z = sol_->source();
  double t = 0.0;
  const double cap = 10.0 * sol_->rate_bound() + 100.0;
  while (true) {
    const double target = hazard(z, t) + rng.exponential();
    if (!(target < cutoff_hazard_[z])) break;
    // first node whose hazard reaches the target
    std::size_t lo = 0;
    std::size_t hi = last_node_;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (node_hazard(mid, z) >= target) hi = mid; else lo = mid + 1;
    }
    double a = std::max(t, lo > 0 ? sol_->node_time(lo - 1) : 0.0);
    double b = lo == last_node_ && node_hazard(lo, z) < target ? cutoff_ : std::min(cutoff_, sol_->node_time(lo));
    // Illinois regula falsi on the bracket [a, b]
    double fa = hazard(z, a) - target;
    double fb = hazard(z, b) - target;
    int side = 0;
    for (int it = 0; it < 100 && fb != 0.0 && b - a > 1e-15 * std::max(1.0, b); ++it) {
      double m = fa < 0.0 && fb > 0.0 ? b - fb * (b - a) / (fb - fa) : 0.5 * (a + b);
      if (!(m > a && m < b)) m = 0.5 * (a + b);
      const double fm = hazard(z, m) - target;
      if (fm < 0.0) {
        a = m;
        fa = fm;
        if (side == -1) fb *= 0.5;
        side = -1;
      } else {
        b = m;
        fb = fm;
        if (side == 1) fa *= 0.5;
        side = 1;
      }
      if (std::abs(fm) < 1e-14) {
        b = m;
        break;
      }
    }
    t = b;
    std::vector<double> r = sol_->rates(t);
    double total = 0.0;
    for (ArcId e : g.out_arcs(z)) total += r[e];
    double u = rng.uniform() * total;
    VertexId next = g.arc(g.out_arcs(z).back()).dst;
    for (ArcId e : g.out_arcs(z)) {
      u -= r[e];
      if (u < 0.0) {
        next = g.arc(e).dst;
        break;
      }
    }
    z = next;
    p.jumps.emplace_back(t, z);
    if (static_cast<double>(p.jumps.size()) > cap) throw NumericalError("bridge jump count exceeded its cap");
  }
  if (at_target_early) *at_target_early = z == sol_->target();
  complete(p, z, rng);
  return p;
}

PathSample sample_bridge(const BridgeSolution& sol, std::uint64_t seed) {
  CounterRng rng(seed);
  return BridgeSampler(sol).sample(rng);
}

// ---------------------------------------------------------------------------

Estimate wilson(std::size_t hits, std::size_t trials, double z) {
  if (trials == 0) throw DomainError("empty conditioning set");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {p, std::max(0.0, centre - half), std::min(1.0, centre + half), hits, trials};
}

Estimate empirical_conditional(std::span<const PathSample> samples, const PathPredicate& event,
                               const PathPredicate& condition) {
  std::size_t hits = 0;
  std::size_t trials = 0;
  for (const PathSample& s : samples) {
    if (condition && !condition(s)) continue;
    ++trials;
    if (event(s)) ++hits;
  }
  return wilson(hits, trials);
}

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("RECIP_THREADS")) {
    try {
      long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw DomainError(std::string("RECIP_THREADS must be a positive integer, got '") + env + "'");
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

void parallel_chunks(std::size_t n, std::size_t threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& f) {
  threads = std::max<std::size_t>(1, std::min(resolve_threads(threads), n));
  if (threads <= 1) {
    if (n > 0) f(0, n, 0);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t c = 0; c < threads; ++c) {
    const std::size_t begin = n * c / threads;
    const std::size_t end = n * (c + 1) / threads;
    pool.emplace_back([&, begin, end, c] {
      try {
        f(begin, end, c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<PathSample> sample_paths(const Intensity& k, VertexId x0, std::uint64_t seed, std::size_t count,
                                     double t_start, double t_end, std::size_t threads, SamplerKind kind) {
  PathSampler sampler(k, kind);
  CounterRng root(seed);
  std::vector<PathSample> out(count);
  parallel_chunks(count, threads, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t i = b; i < e; ++i) {
      CounterRng rng = root.split(i);
      out[i] = sampler.sample(x0, rng, t_start, t_end);
    }
  });
  return out;
}

std::vector<PathSample> sample_bridges(const BridgeSolution& sol, std::uint64_t seed, std::size_t count,
                                       std::size_t threads) {
  BridgeSampler sampler(sol);
  CounterRng root(seed);
  std::vector<PathSample> out(count);
  parallel_chunks(count, threads, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t i = b; i < e; ++i) {
      CounterRng rng = root.split(i);
      out[i] = sampler.sample(rng);
    }
  });
  return out;
}

}  // namespace recip
