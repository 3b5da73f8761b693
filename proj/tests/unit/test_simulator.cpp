#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <set>

#include "oracles.hpp"
#include "recip/bridge.hpp"
#include "recip/error.hpp"
#include "recip/presets.hpp"
#include "recip/simulator.hpp"

using namespace recip;

namespace {

std::shared_ptr<const IntensitySpec> share(const IntensitySpec& k) { return std::make_shared<IntensitySpec>(k); }

}  // namespace

TEST(Rng, DeterministicAndSplittable) {
  CounterRng a(42), b(42), c(43);
  for (int i = 0; i < 10; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
  }
  CounterRng root(7);
  CounterRng s1 = root.split(1), s1b = root.split(1), s2 = root.split(2);
  EXPECT_EQ(s1.next_u64(), s1b.next_u64());
  EXPECT_NE(root.split(1).next_u64(), s2.next_u64());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(Rng, UniformMoments) {
  CounterRng r(1);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    s += u;
    s2 += u * u;
  }
  EXPECT_NEAR(s / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(s2 / n, 1.0 / 3.0, 0.005);
}

TEST(Sampler, SameSeedSamePath) {
  PresetDescriptor p = triangle();
  EXPECT_EQ(sample_path(p.intensity, 0, 99), sample_path(p.intensity, 0, 99));
  auto a = sample_paths(p.intensity, 0, 5, 500, 0.0, 1.0, 1);
  auto b = sample_paths(p.intensity, 0, 5, 500, 0.0, 1.0, 3);
  EXPECT_EQ(a, b);
}

TEST(Sampler, TwoCycleJumpCountIsPoissonOne) {
  PresetDescriptor p = two_cycle(1.0, 1.0);
  const std::size_t n = 100000;
  auto paths = sample_paths(p.intensity, 0, 2024, n, 0.0, 1.0, 1);
  double mean = 0.0;
  for (const auto& s : paths) mean += static_cast<double>(s.jumps.size());
  mean /= static_cast<double>(n);
  EXPECT_NEAR(mean, 1.0, 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Sampler, FirstJumpIsExponential) {
  PresetDescriptor p = two_cycle(1.7, 0.4);
  std::vector<double> first;
  for (const auto& s : sample_paths(p.intensity, 0, 11, 20000, 0.0, 1.0, 1)) {
    if (!s.jumps.empty()) first.push_back(s.jumps[0].first);
  }
  // conditioned on T1 <= 1: truncated exponential cdf
  const double rate = 1.7;
  const double d = oracle::ks_statistic(first, [&](double x) { return -std::expm1(-rate * x) / -std::expm1(-rate); });
  EXPECT_LT(d, 1.63 / std::sqrt(static_cast<double>(first.size())));
}

TEST(Sampler, EndpointLawMatchesTransitionMatrix) {
  std::vector<PresetDescriptor> ps = {triangle(), two_cycle(0.7, 1.9), hypercube(3), birth_death(1.0, 2.0, 20),
                                      complete_graph_sampler({0.4, 0.3, 0.2, 0.1}),
                                      cayley_zd(1, {1.0, 0.5}, 9)};
  const std::size_t n = 100000;
  for (const PresetDescriptor& p : ps) {
    const VertexId x = p.graph->num_vertices() / 2;
    oracle::Matrix m = oracle::uniformized_exp(oracle::generator(*p.graph, p.intensity.rates(0.0)), 1.0);
    std::vector<double> counts(p.graph->num_vertices(), 0.0);
    for (const auto& s : sample_paths(p.intensity, x, 31337, n, 0.0, 1.0, 1)) counts[s.final_state()] += 1.0;
    for (VertexId z = 0; z < p.graph->num_vertices(); ++z) {
      const double pz = m[x][z];
      const double sigma = std::sqrt(pz * (1.0 - pz) / static_cast<double>(n));
      EXPECT_LE(std::abs(counts[z] / static_cast<double>(n) - pz), 3.0 * sigma + 1e-12) << p.name << " z=" << z;
    }
  }
}

TEST(Sampler, ThinningAgreesWithRaces) {
  PresetDescriptor p = complete_graph_sampler({0.4, 0.3, 0.2, 0.1});
  const std::size_t n = 50000;
  std::vector<double> a(4, 0.0), b(4, 0.0);
  for (const auto& s : sample_paths(p.intensity, 0, 1, n, 0.0, 1.0, 1, SamplerKind::exponential_race)) a[s.final_state()]++;
  for (const auto& s : sample_paths(p.intensity, 0, 2, n, 0.0, 1.0, 1, SamplerKind::thinning)) b[s.final_state()]++;
  double chi2 = 0.0;
  for (int z = 0; z < 4; ++z) chi2 += (a[z] - b[z]) * (a[z] - b[z]) / (a[z] + b[z]);
  boost::math::chi_squared_distribution<double> dist(3.0);
  EXPECT_LT(chi2, boost::math::quantile(dist, 0.99));
}

TEST(Sampler, ThinningHandlesTimeDependentRates) {
  GraphPtr g = two_cycle().graph;
  IntensitySpec k(g, {Profile::linear(0.5, 2.0), Profile::exponential(1.0, -1.0)});
  const std::size_t n = 100000;
  Eigen::MatrixXd m = transition_matrix(k, 0.0, 1.0).m;
  double at_b = 0.0;
  for (const auto& s : sample_paths(k, 0, 8, n, 0.0, 1.0, 1)) at_b += s.final_state() == 1;
  const double sigma = std::sqrt(m(0, 1) * (1 - m(0, 1)) / static_cast<double>(n));
  EXPECT_NEAR(at_b / static_cast<double>(n), m(0, 1), 3.0 * sigma);
}

TEST(Sampler, PathInvariantsHold) {
  PresetDescriptor p = triangular_lattice_family({1.0, 2.0, 0.5, 1.5, 1.2, 0.8}, 1.0, 1.0, 5);
  for (const auto& s : sample_paths(p.intensity, 12, 77, 10000, 0.2, 0.9, 1)) {
    EXPECT_NO_THROW(validate_path(*p.graph, s));
    EXPECT_EQ(s.t_start, 0.2);
    EXPECT_EQ(s.t_end, 0.9);
  }
}

TEST(Sampler, RejectsBadWindows) {
  PresetDescriptor p = triangle();
  CounterRng r(1);
  PathSampler ps(p.intensity);
  EXPECT_THROW(ps.sample(0, r, 0.5, 0.2), DomainError);
  EXPECT_THROW(ps.sample(9, r), DomainError);
  EXPECT_THROW(PathSampler(IntensitySpec(p.graph, std::vector<Profile>(6, Profile::linear(1, 1))),
                           SamplerKind::exponential_race),
               DomainError);
}

TEST(Paths, StateAndJumpClock) {
  PathSample p{0, {{0.2, 1}, {0.5, 2}}, 0.0, 1.0};
  EXPECT_EQ(p.state_at(0.1), 0u);
  EXPECT_EQ(p.state_at(0.2), 1u);
  EXPECT_EQ(p.state_at(0.7), 2u);
  EXPECT_EQ(p.final_state(), 2u);
  auto tk = jump_times_after(p, 0.1, 3);
  EXPECT_EQ(tk[0], 0.2);
  EXPECT_EQ(tk[1], 0.5);
  EXPECT_TRUE(std::isinf(tk[2]));
  DirectedGraph g = *triangle().graph;
  EXPECT_THROW(validate_path(g, PathSample{0, {{0.5, 1}, {0.4, 2}}, 0.0, 1.0}), DomainError);
  EXPECT_THROW(validate_path(g, PathSample{0, {{0.5, 0}}, 0.0, 1.0}), DomainError);
}

TEST(BridgeSampler, EndsAtTargetWithEvenParity) {
  PresetDescriptor p = hypercube(2);
  BridgeSolution sol = BridgeSolution::solve(share(p.intensity), 0, 0);
  auto paths = sample_bridges(sol, 5, 10000, 1);
  for (const auto& s : paths) {
    EXPECT_EQ(s.final_state(), 0u);
    EXPECT_EQ(s.jumps.size() % 2, 0u);
    EXPECT_NO_THROW(validate_path(*p.graph, s));
  }
}

TEST(BridgeSampler, MidTimeMarginalMatchesOracle) {
  PresetDescriptor p = complete_graph_sampler({0.4, 0.3, 0.2, 0.1});
  BridgeSolution sol = BridgeSolution::solve(share(p.intensity), 0, 3);
  const std::size_t n = 40000;
  auto paths = sample_bridges(sol, 12, n, 1);
  oracle::Matrix q = oracle::generator(*p.graph, p.intensity.rates(0.0));
  oracle::Matrix a = oracle::uniformized_exp(q, 0.5);
  oracle::Matrix full = oracle::uniformized_exp(q, 1.0);
  std::vector<double> counts(4, 0.0);
  std::size_t at_y = 0;
  for (const auto& s : paths) {
    counts[s.state_at(0.5)]++;
    at_y += s.final_state() == 3;
  }
  EXPECT_GE(static_cast<double>(at_y) / static_cast<double>(n), 0.999);
  for (VertexId z = 0; z < 4; ++z) {
    const double pz = a[0][z] * a[z][3] / full[0][3];
    const double sigma = std::sqrt(pz * (1 - pz) / static_cast<double>(n));
    EXPECT_NEAR(counts[z] / static_cast<double>(n), pz, 3.0 * sigma) << z;
  }
}

TEST(BridgeSampler, JumpTimesFollowTheBridgeLaw) {
  // hypercube d=1 from 0 to 1: the single-jump density is proportional to
  // e^{-t} sinh... compare the empirical law of the first jump with the exact cdf
  PresetDescriptor p = hypercube(1);
  BridgeSolution sol = BridgeSolution::solve(share(p.intensity), 0, 1);
  std::vector<double> first;
  for (const auto& s : sample_bridges(sol, 3, 20000, 1)) first.push_back(s.jumps[0].first);
  // P(T1 > t) = exp(-int_0^t coth(1 - r) dr) = sinh(1 - t) / sinh(1)
  const double d = oracle::ks_statistic(first, [](double t) { return 1.0 - std::sinh(1.0 - t) / std::sinh(1.0); });
  EXPECT_LT(d, 1.63 / std::sqrt(static_cast<double>(first.size())));
}

TEST(Wilson, KnownIntervalsAndErrors) {
  Estimate e = wilson(50, 100);
  EXPECT_NEAR(e.lo, 0.40383, 1e-5);
  EXPECT_NEAR(e.hi, 0.59617, 1e-5);
  Estimate all = wilson(10, 10);
  EXPECT_DOUBLE_EQ(all.p, 1.0);
  EXPECT_NEAR(all.hi, 1.0, 1e-15);
  EXPECT_THROW(wilson(0, 0), DomainError);
}

TEST(Wilson, WidthScalesAsInverseSqrtN) {
  const double w1 = wilson(300, 1000).hi - wilson(300, 1000).lo;
  const double w2 = wilson(30000, 100000).hi - wilson(30000, 100000).lo;
  EXPECT_NEAR(w1 / w2, 10.0, 0.05);
}

TEST(Empirical, ConditionalsAndFullSpace) {
  PresetDescriptor p = two_cycle(1.0, 1.0);
  auto paths = sample_paths(p.intensity, 0, 4, 20000, 0.0, 1.0, 1);
  Estimate all = empirical_conditional(paths, [](const PathSample&) { return true; });
  EXPECT_DOUBLE_EQ(all.p, 1.0);
  EXPECT_THROW(empirical_conditional(
                   paths, [](const PathSample&) { return true; },
                   [](const PathSample& s) { return s.final_state() == 7; }),
               DomainError);
  // P(T1 <= 1/2 | one jump) = 1/2 for equal exit rates
  Estimate half = empirical_conditional(
      paths, [](const PathSample& s) { return s.jumps[0].first <= 0.5; },
      [](const PathSample& s) { return s.jumps.size() == 1; });
  EXPECT_TRUE(half.covers(0.5)) << half.p;
}

TEST(Threads, ResolveAndParallelChunksCoverRange) {
  EXPECT_EQ(resolve_threads(3), 3u);
  std::vector<int> hit(1000, 0);
  parallel_chunks(1000, 4, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t i = b; i < e; ++i) hit[i]++;
  });
  for (int h : hit) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_chunks(10, 2, [](std::size_t, std::size_t, std::size_t) { throw NumericalError("x"); }),
               NumericalError);
}
