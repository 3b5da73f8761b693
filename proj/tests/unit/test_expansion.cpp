#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "recip/bridge.hpp"
#include "recip/characteristics.hpp"
#include "recip/error.hpp"
#include "recip/expansion.hpp"
#include "recip/presets.hpp"

using namespace recip;

namespace {

std::vector<double> walk_totals(const IntensitySpec& k, const ClosedWalk& c) {
  std::vector<double> q;
  for (VertexId v : c.vertices()) q.push_back(k.total_rate(0.0, v));
  return q;
}

std::vector<double> walk_rates(const IntensitySpec& k, const ClosedWalk& c) {
  std::vector<double> j;
  for (ArcId a : walk_arcs(k.graph(), c.walk())) j.push_back(k.rate(0.0, a));
  return j;
}

}  // namespace

TEST(ArcProbability, EqualExitRatesGiveOneHalf) {
  PresetDescriptor p = two_cycle(1.0, 1.0);
  for (double h : default_h_grid()) {
    EXPECT_NEAR(exact_arc_probability(p.intensity, 0.3, h, 0).ratio(), 0.5, 1e-12) << h;
  }
}

TEST(ArcProbability, MatchesConstantRateOracle) {
  PresetDescriptor p = complete_graph_sampler({0.4, 0.3, 0.2, 0.1});
  const DirectedGraph& g = *p.graph;
  for (ArcId a : {g.arc_id(0, 3), g.arc_id(2, 1)}) {
    const double qa = p.intensity.total_rate(0.0, g.arc(a).src);
    const double qb = p.intensity.total_rate(0.0, g.arc(a).dst);
    for (double tau : {0.25, 0.5, 0.9}) {
      for (double h : {0.2, 0.01}) {
        EXPECT_NEAR(exact_arc_probability(p.intensity, 0.1, h, a, tau).ratio(),
                    oracle::constant_arc_ratio(qa, qb, h, tau), 1e-12);
      }
    }
  }
}

TEST(ArcProbability, DenominatorIsTheOneJumpProbability) {
  PresetDescriptor p = two_cycle(1.7, 0.4);
  const double h = 0.3;
  // e^{-1.7 s} 1.7 e^{-0.4 (h - s)} integrated over s in [0, h]
  const double want = 1.7 * (std::exp(-0.4 * h) - std::exp(-1.7 * h)) / (1.7 - 0.4);
  EXPECT_NEAR(exact_arc_probability(p.intensity, 0.0, h, 0).denominator, want, 1e-14);
}

TEST(ArcFit, BirthDeathBoundaryArcRecoversMu) {
  for (double mu : {0.5, 1.0, 2.0}) {
    PresetDescriptor p = birth_death(1.0, mu, 10);
    const ArcId a = p.graph->arc_id(0, 1);
    FitResult f = fit_characteristic(probe_arc(p.intensity, 0.3, a));
    EXPECT_NEAR(f.estimate, mu, 1e-4 * mu);
    EXPECT_NEAR(f.intercept, 0.5, 1e-6);
  }
}

TEST(ArcFit, RichardsonReducesTheError) {
  // constant rates have no h^2 term in the ratio, so use a time-dependent rate
  GraphPtr g = std::make_shared<const DirectedGraph>(DirectedGraph::build({"a", "b"}, {{"a", "b"}}, true));
  IntensitySpec k(g, {Profile::exponential(1.0, 0.8), Profile::constant(1.0)});
  const double t = 0.4;
  const double want = chi_arc(k, t, 0);
  auto slope_at = [&](double h) { return -8.0 * (exact_arc_probability(k, t, h, 0).ratio() - 0.5) / h; };
  const double h = 0.04;
  const double plain = slope_at(h / 2);
  const double extrap = richardson(slope_at(h), slope_at(h / 2), 1);
  EXPECT_LT(std::abs(extrap - want), 0.1 * std::abs(plain - want));
  EXPECT_DOUBLE_EQ(richardson(1.0, 3.0, 2), (4.0 * 3.0 - 1.0) / 3.0);
}

TEST(ArcFit, TimeDependentRates) {
  // k(a->b) = e^{ct}, k(b->a) = 1: chi_a(a->b) = c + 1 - e^{ct}
  GraphPtr g = std::make_shared<const DirectedGraph>(DirectedGraph::build({"a", "b"}, {{"a", "b"}}, true));
  IntensitySpec k(g, {Profile::exponential(1.0, 0.8), Profile::constant(1.0)});
  const double t = 0.4;
  // the ratio has an h^2 term here, so the fit needs smaller h than the default grid
  FitResult f = fit_characteristic(probe_arc(k, t, g->arc_id(0, 1), {1e-3, 3e-4, 1e-4}));
  EXPECT_NEAR(f.estimate, chi_arc(k, t, g->arc_id(0, 1)), 1e-3);
}

TEST(CycleProbability, MatchesBidiagonalOracle) {
  PresetDescriptor p = complete_graph_sampler({0.4, 0.3, 0.2, 0.1});
  for (const ClosedWalk& c : {ClosedWalk({0, 1, 0}), ClosedWalk({0, 1, 2, 0}), ClosedWalk({0, 1, 0, 3, 0}),
                              ClosedWalk({2, 3, 1, 0, 2})}) {
    for (double h : {0.5, 0.1, 1e-3}) {
      const double want = oracle::walk_probability(walk_totals(p.intensity, c), walk_rates(p.intensity, c), h);
      EXPECT_NEAR(exact_cycle_probability(p.intensity, 0.2, h, c) / want, 1.0, 1e-9) << h;
    }
  }
}

TEST(CycleProbability, LiteralFormDividesByReturnProbability) {
  PresetDescriptor p = complete_graph_sampler({0.4, 0.3, 0.2, 0.1});
  ClosedWalk c({1, 2, 3, 1});
  const double h = 0.2;
  oracle::Matrix m = oracle::uniformized_exp(oracle::generator(*p.graph, p.intensity.rates(0.0)), h);
  EXPECT_NEAR(exact_cycle_probability_literal(p.intensity, 0.1, h, c),
              exact_cycle_probability(p.intensity, 0.1, h, c) / m[1][1], 1e-13);
}

TEST(CycleProbability, EdgeCasesAndLimits) {
  PresetDescriptor p = triangle();
  EXPECT_EQ(exact_cycle_probability(p.intensity, 0.3, 0.0, ClosedWalk({0, 1, 2, 0})), 0.0);
  EXPECT_THROW(exact_cycle_probability(p.intensity, 0.3, 0.1, ClosedWalk({0, 1, 0, 1, 0, 1, 0})), DomainError);
}

TEST(CycleFit, ConstantRatesGiveTheRateProduct) {
  PresetDescriptor p = birth_death(1.0, 2.0, 10);
  FitResult f = fit_characteristic(probe_cycle(p.intensity, 0.3, ClosedWalk({3, 4, 3})));
  EXPECT_NEAR(f.estimate, 2.0, 2e-3);
  PresetDescriptor tri = triangle();
  FitResult g = fit_characteristic(probe_cycle(tri.intensity, 0.3, ClosedWalk({0, 1, 2, 0})));
  EXPECT_NEAR(g.estimate, 1.0, 1e-3);
}

TEST(CycleFit, TriangularFaceGivesTheProductOfItsRates) {
  std::vector<double> j = {1.0, 2.0, 0.5, 1.5, 1.2, 0.8};
  PresetDescriptor p = triangular_lattice_family(j, 1.3, 0.7, 7);
  const VertexId c = 3 + 7 * 3;
  ClosedWalk face({c, c + 1, c + 7, c});
  const double want = j[0] * j[2] * j[4];
  EXPECT_NEAR(fit_characteristic(probe_cycle(p.intensity, 0.3, face)).estimate / want, 1.0, 1e-2);
  EXPECT_NEAR(fit_characteristic(probe_cycle(*p.partner, 0.3, face)).estimate / want, 1.0, 1e-2);
}

TEST(CycleFit, RotationsShareTheCoefficient) {
  PresetDescriptor p = complete_graph_sampler({0.4, 0.3, 0.2, 0.1});
  const double a = fit_characteristic(probe_cycle(p.intensity, 0.3, ClosedWalk({0, 1, 2, 0}))).estimate;
  const double b = fit_characteristic(probe_cycle(p.intensity, 0.3, ClosedWalk({1, 2, 0, 1}))).estimate;
  EXPECT_NEAR(a / b, 1.0, 1e-3);
  EXPECT_NEAR(a / chi_cycle(p.intensity, 0.3, ClosedWalk({0, 1, 2, 0})), 1.0, 1e-3);
}

TEST(Expansion, BridgeKeepsTheShortTimeCoefficients) {
  PresetDescriptor p = triangle();
  auto k = std::make_shared<IntensitySpec>(p.intensity);
  BridgeSolution sol = BridgeSolution::solve(k, 0, 2);
  const double t = 0.3;
  const std::vector<double> hs = {3e-2, 1e-2, 3e-3, 1e-3};
  for (ArcId a = 0; a < p.graph->num_arcs(); ++a) {
    const double want = chi_arc(p.intensity, t, a);
    EXPECT_NEAR(fit_characteristic(probe_arc(sol, t, a, hs)).estimate, want, 1e-3) << a;
  }
  ClosedWalk c({0, 1, 2, 0});
  EXPECT_NEAR(fit_characteristic(probe_cycle(sol, t, c, hs)).estimate, 1.0, 1e-2);
}

TEST(Expansion, FitRejectsCurvedData) {
  PresetDescriptor p = birth_death(1.0, 2.0, 10);
  ExpansionProbe probe = probe_arc(p.intensity, 0.3, p.graph->arc_id(0, 1), {0.5, 0.3, 0.1});
  EXPECT_THROW(fit_characteristic(probe, {3, 1e-9}), NumericalError);
}

TEST(Expansion, HGridValidation) {
  EXPECT_THROW(check_h_grid({1e-2, 1e-1}, 0.3), DomainError);
  EXPECT_THROW(check_h_grid({0.8, 1e-1}, 0.3), DomainError);
  EXPECT_THROW(check_h_grid({1e-1, 0.0}, 0.3), DomainError);
  EXPECT_NO_THROW(check_h_grid(default_h_grid(), 0.3));
  PresetDescriptor p = triangle();
  EXPECT_THROW(probe_arc(p.intensity, 0.95, 0, {0.1, 0.01}), DomainError);
}

TEST(McCheck, CoversTheQuadratureOracle) {
  PresetDescriptor p = birth_death(1.0, 2.0, 10);
  McCheck arc = mc_expansion_check(p.intensity, 0.3, 0.1, p.graph->arc_id(0, 1), 200000, 5, 1);
  EXPECT_TRUE(arc.consistent) << arc.mc.p << " vs " << arc.oracle;
  EXPECT_NEAR(arc.oracle, exact_arc_probability(p.intensity, 0.3, 0.1, p.graph->arc_id(0, 1)).ratio(), 1e-15);
  McCheck cyc = mc_expansion_check(p.intensity, 0.3, 0.1, ClosedWalk({3, 4, 3}), 200000, 6, 1);
  EXPECT_TRUE(cyc.consistent) << cyc.mc.p << " vs " << cyc.oracle;
}

TEST(McCheck, IntervalCoverageIsNearNominal) {
  PresetDescriptor p = two_cycle(1.7, 0.4);
  std::size_t covered = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    covered += mc_expansion_check(p.intensity, 0.2, 0.3, ArcId{0}, 5000, seed, 1).consistent;
  }
  EXPECT_GE(covered, 90u);
}

TEST(McCheck, RejectsTooFewPaths) {
  PresetDescriptor p = triangle();
  EXPECT_THROW(mc_expansion_check(p.intensity, 0.3, 0.1, ArcId{0}, 999, 1, 1), DomainError);
}
