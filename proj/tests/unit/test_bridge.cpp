#include <gtest/gtest.h>

#include <boost/math/distributions/poisson.hpp>
#include <cmath>

#include "oracles.hpp"
#include "recip/bridge.hpp"
#include "recip/characteristics.hpp"
#include "recip/error.hpp"
#include "recip/presets.hpp"

using namespace recip;

namespace {

std::shared_ptr<const IntensitySpec> share(const IntensitySpec& k) { return std::make_shared<IntensitySpec>(k); }

double max_abs_diff(const Eigen::MatrixXd& a, const oracle::Matrix& b) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) d = std::max(d, std::abs(a(i, j) - b[i][j]));
  return d;
}

}  // namespace

TEST(TransitionMatrix, HomogeneousMethodsMatchUniformisation) {
  PresetDescriptor p = complete_graph_sampler({0.4, 0.3, 0.2, 0.1});
  oracle::Matrix ref = oracle::uniformized_exp(oracle::generator(*p.graph, p.intensity.rates(0.0)), 0.7);
  EXPECT_LT(max_abs_diff(transition_matrix(p.intensity, 0.1, 0.8, Propagator::expm).m, ref), 1e-13);
  EXPECT_LT(max_abs_diff(transition_matrix(p.intensity, 0.1, 0.8, Propagator::rk4).m, ref), 1e-12);
  EXPECT_LT(max_abs_diff(transition_matrix(p.intensity, 0.1, 0.8, Propagator::ordered_expm).m, ref), 1e-13);
}

TEST(TransitionMatrix, InhomogeneousPropagatorsAgree) {
  GraphPtr g = hypercube_graph(2);
  std::vector<Profile> ps;
  for (ArcId a = 0; a < g->num_arcs(); ++a) ps.push_back(Profile::sinusoid(1.0 + 0.1 * a, 0.5, 1.0, 0.3 * a));
  IntensitySpec k(g, ps);
  Eigen::MatrixXd a = transition_matrix(k, 0.0, 1.0, Propagator::rk4).m;
  Eigen::MatrixXd b = transition_matrix(k, 0.0, 1.0, Propagator::ordered_expm, 1.0 / 4096).m;
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-6);
  for (Eigen::Index i = 0; i < a.rows(); ++i) EXPECT_NEAR(a.row(i).sum(), 1.0, 1e-12);
  EXPECT_THROW(transition_matrix(k, 0.0, 1.0, Propagator::expm), DomainError);
}

TEST(Bridge, HypercubeMatchesTanhCothOracle) {
  for (std::size_t d = 1; d <= 3; ++d) {
    PresetDescriptor p = hypercube(d);
    const DirectedGraph& g = *p.graph;
    const VertexId n = g.num_vertices();
    for (VertexId x : {VertexId{0}, n - 1}) {
      for (VertexId y : {VertexId{0}, n - 1}) {
        BridgeSolution sol = BridgeSolution::solve(share(p.intensity), x, y);
        double worst = 0.0;
        for (int i = 0; i <= 1024; ++i) {
          const double t = 0.99 * i / 1024.0;
          std::vector<double> r = sol.rates(t);
          for (ArcId a = 0; a < g.num_arcs(); ++a) {
            const std::size_t bit = g.arc(a).src ^ g.arc(a).dst;
            const bool agrees = ((g.arc(a).src ^ y) & bit) == 0;
            const double want = oracle::hypercube_flip_rate(1.0 - t, agrees);
            worst = std::max(worst, std::abs(r[a] / want - 1.0));
          }
        }
        EXPECT_LT(worst, 1e-6) << "d=" << d << " x=" << x << " y=" << y;
      }
    }
  }
}

TEST(Bridge, HjbResidualIsSmall) {
  std::vector<PresetDescriptor> ps = {triangle(), hypercube(2), birth_death(1.0, 2.0, 20),
                                      complete_graph_sampler({0.4, 0.3, 0.2, 0.1})};
  for (const PresetDescriptor& p : ps) {
    BridgeSolution sol = BridgeSolution::solve(share(p.intensity), 0, 1);
    EXPECT_LT(hjb_residual(sol), 1e-6) << p.name;
  }
}

TEST(Bridge, ClosedFormPotentialHasTinyResidual) {
  for (std::size_t d = 1; d <= 3; ++d) {
    PresetDescriptor p = hypercube(d);
    const VertexId y = (1u << d) - 1;
    BridgeSolution sol = BridgeSolution::from_potential(
        share(p.intensity), 0, y, [&](double s, VertexId z) { return p.potential(s, z, y); });
    EXPECT_LT(hjb_residual(sol), 1e-8) << d;
  }
}

TEST(Bridge, PerturbedPotentialIsDetected) {
  PresetDescriptor p = hypercube(2);
  BridgeSolution sol = BridgeSolution::solve(share(p.intensity), 0, 3);
  BridgeSolution bad = sol.perturbed(sol.num_nodes() / 2, 1, 1e-3);
  EXPECT_GT(hjb_residual(bad), 1e-2);
}

TEST(Bridge, TimeDependentReferenceKeepsItsCharacteristics) {
  GraphPtr g = triangle().graph;
  std::vector<Profile> ps;
  for (ArcId a = 0; a < g->num_arcs(); ++a) ps.push_back(Profile::exponential(0.5 + 0.25 * a, a % 2 ? 0.7 : -0.4));
  auto k = share(IntensitySpec(g, ps));
  BridgeSolution sol = BridgeSolution::solve(k, 0, 2);
  EXPECT_LT(hjb_residual(sol), 1e-6);
  ClassCheck check = default_class_check(*k, sol);
  check.tol = {1e-4, 1e-6};
  ClassReport r = same_class(*k, sol, check);
  EXPECT_TRUE(r.equal) << r.violation_object << " " << r.max_arc_residual;
  EXPECT_LT(r.max_cycle_residual, 1e-6);
}

TEST(Bridge, LogRatioIsAGradient) {
  PresetDescriptor p = birth_death(1.0, 2.0, 10);
  BridgeSolution sol = BridgeSolution::solve(share(p.intensity), 2, 5);
  const DirectedGraph& g = *p.graph;
  CycleBasis basis = t_basis(g, spanning_tree(g, 0));
  EXPECT_LT(gradient_residual(sol, basis), 1e-8);
  for (double t : {0.1, 0.5, 0.9, 0.995}) {
    std::vector<double> r = sol.rates(t);
    std::vector<double> k = p.intensity.rates(t);
    ArcFunction ell(g.num_arcs(), 0.0);
    for (ArcId a = 0; a < g.num_arcs(); ++a) ell[a] = std::log(r[a] / k[a]);
    std::vector<double> psi = reconstruct_potential(g, ell, 2, 1e-8);
    std::vector<double> lu = sol.log_u_at(t);
    for (VertexId z = 0; z < g.num_vertices(); ++z) EXPECT_NEAR(psi[z], lu[z] - lu[2], 1e-8);
  }
}

TEST(Bridge, MarginalsMatchHTransform) {
  PresetDescriptor p = complete_graph_sampler({0.4, 0.3, 0.2, 0.1});
  BridgeSolution sol = BridgeSolution::solve(share(p.intensity), 0, 3);
  oracle::Matrix q = oracle::generator(*p.graph, p.intensity.rates(0.0));
  oracle::Matrix full = oracle::uniformized_exp(q, 1.0);
  std::vector<double> times = {0.25, 0.5, 0.9, 0.999};
  auto marg = bridge_marginals(sol, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    oracle::Matrix a = oracle::uniformized_exp(q, times[i]);
    oracle::Matrix b = oracle::uniformized_exp(q, 1.0 - times[i]);
    double tv = 0.0;
    for (VertexId z = 0; z < 4; ++z) tv += std::abs(marg[i][z] - a[0][z] * b[z][3] / full[0][3]);
    EXPECT_LT(0.5 * tv, 1e-6) << times[i];
    std::vector<double> ex = exact_bridge_marginal(p.intensity, 0, 3, times[i]);
    for (VertexId z = 0; z < 4; ++z) EXPECT_NEAR(ex[z], a[0][z] * b[z][3] / full[0][3], 1e-12);
  }
}

TEST(Bridge, BoundaryBehaviour) {
  PresetDescriptor p = hypercube(1);
  BridgeSolution sol = BridgeSolution::solve(share(p.intensity), 0, 1);
  std::vector<double> deltas = {1e-1, 1e-2, 1e-3};
  DivergenceReport r = boundary_divergence_check(sol, deltas);
  EXPECT_TRUE(r.diverging_monotone);
  EXPECT_TRUE(r.target_converging);
  EXPECT_NEAR(r.target_limit, std::log(std::cosh(1.0)), 1e-9);
  // at z = y the bridge rate is tanh(1 - t); its integral up to 1 - delta
  for (const DivergenceRow& row : r.rows) {
    if (row.z != 1) continue;
    const double want = std::log(std::cosh(1.0)) - std::log(std::cosh(row.delta));
    EXPECT_NEAR(row.integral, want, 1e-7);
  }
}

TEST(Bridge, DomainErrors) {
  PresetDescriptor p = triangle();
  EXPECT_THROW(BridgeSolution::solve(share(p.intensity), 0, 7), DomainError);
  BridgeOptions bad;
  bad.delta = 0.0;
  EXPECT_THROW(BridgeSolution::solve(share(p.intensity), 0, 1, bad), DomainError);
  BridgeSolution sol = BridgeSolution::solve(share(p.intensity), 0, 1);
  EXPECT_THROW(sol.rates(1.0), DomainError);
}

TEST(TruncationRadius, MatchesPoissonTail) {
  for (double bound : {0.5, 1.0, 2.0, 5.0}) {
    for (double eps : {1e-3, 1e-8, 1e-12}) {
      boost::math::poisson_distribution<double> pois(bound);
      std::size_t want = 0;
      while (!(boost::math::cdf(boost::math::complement(pois, static_cast<double>(want))) < eps)) ++want;
      EXPECT_EQ(truncation_radius(bound, eps), want) << bound << " " << eps;
    }
  }
  EXPECT_EQ(truncation_radius(1.0, 1e-12), 14u);
  EXPECT_EQ(truncation_radius(1.0, 1.0), 0u);
}
