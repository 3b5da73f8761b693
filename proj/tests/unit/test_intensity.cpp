#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "recip/error.hpp"
#include "recip/intensity.hpp"
#include "recip/presets.hpp"

using namespace recip;

TEST(Profile, ClosedFormValues) {
  EXPECT_DOUBLE_EQ(Profile::constant(2.5).value(0.7), 2.5);
  EXPECT_DOUBLE_EQ(Profile::exponential(2.0, -1.0).value(0.5), 2.0 * std::exp(-0.5));
  EXPECT_DOUBLE_EQ(Profile::linear(1.0, 2.0).value(0.25), 1.5);
  EXPECT_DOUBLE_EQ(Profile::sinusoid(2.0, 1.0, 1.0, 0.0).value(0.25), 3.0);
  EXPECT_DOUBLE_EQ(Profile::exponential(2.0, -1.0).dlog(0.3), -1.0);
  EXPECT_DOUBLE_EQ(Profile::constant(3.0).dlog(0.3), 0.0);
}

TEST(Profile, RejectsNonPositive) {
  EXPECT_THROW(Profile::constant(0.0), DomainError);
  EXPECT_THROW(Profile::constant(-1.0), DomainError);
  EXPECT_THROW(Profile::sinusoid(1.0, 1.0, 1.0, 0.0), DomainError);
  EXPECT_THROW(Profile::linear(1.0, -1.0), DomainError);
  EXPECT_THROW(Profile::grid({1.0, 0.0, 1.0}), DomainError);
  EXPECT_THROW(Profile::grid({1.0}), DomainError);
}

TEST(Profile, ClosedFormDerivativesMatchCentralDifferences) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double a = 0.5 + 2.0 * u(rng);
    std::vector<Profile> ps = {
        Profile::exponential(a, 4.0 * u(rng) - 2.0),
        Profile::sinusoid(a, a * (0.9 * u(rng)), 3.0 * u(rng), 6.0 * u(rng)),
        Profile::linear(a, a * (1.8 * u(rng) - 0.9)),
    };
    const double t = 0.01 + 0.98 * u(rng);
    for (const Profile& p : ps) {
      const double h = 1e-6;
      const double fd = (std::log(p.value(t + h)) - std::log(p.value(t - h))) / (2 * h);
      EXPECT_NEAR(p.dlog(t), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Profile, GridIsExactAtNodesAndSmooth) {
  std::vector<double> v = {1.0, 2.0, 1.5, 3.0, 2.5};
  Profile p = Profile::grid(v);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_DOUBLE_EQ(p.value(static_cast<double>(i) / 4.0), v[i]);
  // continuity of the value at a node from both sides
  EXPECT_NEAR(p.value(0.5 - 1e-9), p.value(0.5 + 1e-9), 1e-7);
  // the derivative of log k is continuous too (cubic Hermite)
  EXPECT_NEAR(p.dlog(0.5 - 1e-9), p.dlog(0.5 + 1e-9), 1e-6);
  // geometric data: log-linear interpolation is reproduced exactly
  Profile q = Profile::grid({1.0, std::exp(1.0), std::exp(2.0)});
  EXPECT_NEAR(q.value(0.3), std::exp(0.6), 1e-12);
  EXPECT_NEAR(q.dlog(0.3), 2.0, 1e-6);
}

TEST(IntensitySpec, TotalRateStaysBelowBound) {
  GraphPtr g = hypercube_graph(2);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  std::vector<Profile> ps;
  for (ArcId a = 0; a < g->num_arcs(); ++a) {
    switch (a % 4) {
      case 0: ps.push_back(Profile::sinusoid(u(rng), 0.1, 2.0, 0.3)); break;
      case 1: ps.push_back(Profile::exponential(u(rng), 1.0)); break;
      case 2: ps.push_back(Profile::grid({u(rng), u(rng), u(rng), u(rng)})); break;
      default: ps.push_back(Profile::linear(u(rng), 0.5)); break;
    }
  }
  IntensitySpec k(g, ps);
  EXPECT_FALSE(k.is_time_homogeneous());
  EXPECT_FALSE(k.is_analytic());
  for (int i = 0; i <= 1000; ++i) {
    const double t = i / 1000.0;
    for (VertexId z = 0; z < g->num_vertices(); ++z) EXPECT_LE(k.total_rate(t, z), k.rate_bound());
  }
}

TEST(IntensitySpec, ValidatesShapeAndTime) {
  GraphPtr g = hypercube_graph(1);
  EXPECT_THROW(IntensitySpec(g, {Profile::constant(1.0)}), DomainError);
  IntensitySpec k = IntensitySpec::constant(g, 2.0);
  EXPECT_TRUE(k.is_time_homogeneous());
  EXPECT_DOUBLE_EQ(k.rate_bound(), 2.0);
  EXPECT_THROW(k.rates(1.5), DomainError);
  EXPECT_THROW(k.rate(-0.1, 0), DomainError);
  EXPECT_DOUBLE_EQ(k.rate(0.4, 1), 2.0);
  EXPECT_EQ(k, IntensitySpec::constant(g, std::vector<double>{2.0, 2.0}));
}
