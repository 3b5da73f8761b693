#pragma once

// Exact path sampling for Markov jump processes and for tabulated bridges.

#include <cstdint>
#include <functional>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "recip/bridge.hpp"
#include "recip/intensity.hpp"

namespace recip {

// Counter-based generator: output i of stream s is a splitmix64 hash of (key(s), i).
// Streams derived by split() are independent of the parent's position.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  double uniform();      // in (0, 1)
  double exponential();  // Exp(1)
  CounterRng split(std::uint64_t index) const;
  std::uint64_t counter() const { return counter_; }

 private:
  CounterRng() = default;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

struct PathSample {
  VertexId x0 = 0;
  std::vector<std::pair<double, VertexId>> jumps;  // (time, destination)
  double t_start = 0.0;
  double t_end = 1.0;

  VertexId state_at(double t) const;
  VertexId final_state() const { return jumps.empty() ? x0 : jumps.back().second; }
  friend bool operator==(const PathSample&, const PathSample&) = default;
};

// Throws DomainError on non-increasing times, times outside (t_start, t_end] or non-arcs.
void validate_path(const DirectedGraph& g, const PathSample& p);

// T^t_1, ..., T^t_m: the first m jump instants strictly after t; +inf when absent.
std::vector<double> jump_times_after(const PathSample& p, double t, std::size_t m);

enum class SamplerKind { automatic, exponential_race, thinning };

// Exponential races for time-homogeneous intensities, thinning against the rate
// bound otherwise. Rates of homogeneous intensities are cached at construction.
class PathSampler {
 public:
  explicit PathSampler(const Intensity& k, SamplerKind kind = SamplerKind::automatic);
  PathSample sample(VertexId x0, CounterRng& rng, double t_start = 0.0, double t_end = 1.0) const;
  SamplerKind kind() const { return kind_; }

 private:
  VertexId route(VertexId z, std::span<const double> rates, double total, CounterRng& rng) const;

  const Intensity* k_;
  SamplerKind kind_;
  std::vector<double> rates_;
  std::vector<double> totals_;
  double bound_;
};

PathSample sample_path(const Intensity& k, VertexId x0, std::uint64_t seed, double t_start = 0.0,
                       double t_end = 1.0);

// Paths of the bridge. On [0, 1 - delta] jump times come from inverting the bridge
// cumulative hazard J_z(t) - log u_t(z); on (1 - delta, 1] the reference rates are
// frozen and the exact bridge of that chain to y is drawn by uniformisation.
class BridgeSampler {
 public:
  explicit BridgeSampler(const BridgeSolution& sol);
  // at_target_early reports whether the path already sat at y at 1 - delta.
  PathSample sample(CounterRng& rng, bool* at_target_early = nullptr) const;
  double cutoff() const { return cutoff_; }

 private:
  double hazard(VertexId z, double t) const;
  double node_hazard(std::size_t k, VertexId z) const { return lambda_[k * n_ + z]; }
  void prepare_terminal();
  void complete(PathSample& p, VertexId from, CounterRng& rng) const;

  const BridgeSolution* sol_;
  std::size_t n_;
  double cutoff_;
  std::size_t last_node_;           // last grid node with t <= cutoff
  std::vector<double> lambda_;      // cumulative hazard per (node, vertex)
  std::vector<double> J_;           // int_0^{t_k} jbar(r, z) dr per (node, vertex)
  std::vector<double> frozen_;      // reference rates at the cutoff
  std::vector<double> cutoff_hazard_;
  // uniformisation tables of the frozen terminal chain
  std::vector<double> tot_;
  double omega_ = 0.0;
  std::vector<std::vector<double>> back_;  // P^m e_y
  std::vector<double> pois_;
};

PathSample sample_bridge(const BridgeSolution& sol, std::uint64_t seed);

struct Estimate {
  double p = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t hits = 0;
  std::size_t trials = 0;
  bool covers(double v) const { return lo <= v && v <= hi; }
};

inline constexpr double kZ95 = 1.959963984540054;

// Wilson score interval. Throws DomainError when trials == 0.
Estimate wilson(std::size_t hits, std::size_t trials, double z = kZ95);

using PathPredicate = std::function<bool(const PathSample&)>;
Estimate empirical_conditional(std::span<const PathSample> samples, const PathPredicate& event,
                               const PathPredicate& condition = nullptr);

// 0 means: RECIP_THREADS, else hardware concurrency.
std::size_t resolve_threads(std::size_t requested);

// Runs f(begin, end, chunk) on contiguous chunks of [0, n); chunk indices are in order.
void parallel_chunks(std::size_t n, std::size_t threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& f);

// Path i uses CounterRng(seed).split(i), so results do not depend on the thread count.
std::vector<PathSample> sample_paths(const Intensity& k, VertexId x0, std::uint64_t seed, std::size_t count,
                                     double t_start = 0.0, double t_end = 1.0, std::size_t threads = 0,
                                     SamplerKind kind = SamplerKind::automatic);
std::vector<PathSample> sample_bridges(const BridgeSolution& sol, std::uint64_t seed, std::size_t count,
                                       std::size_t threads = 0);

}  // namespace recip
