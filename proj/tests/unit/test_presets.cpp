#include <gtest/gtest.h>

#include <cmath>

#include "recip/characteristics.hpp"
#include "recip/error.hpp"
#include "recip/presets.hpp"

using namespace recip;

TEST(Presets, GraphShapes) {
  EXPECT_EQ(birth_death_graph(20)->num_vertices(), 21u);
  EXPECT_EQ(birth_death_graph(20)->num_arcs(), 40u);
  GraphPtr h = hypercube_graph(3);
  EXPECT_EQ(h->num_vertices(), 8u);
  EXPECT_EQ(h->num_arcs(), 24u);
  EXPECT_EQ(h->name(1), "100");
  EXPECT_EQ(zd_box_graph(2, 5)->num_vertices(), 25u);
  EXPECT_EQ(triangular_lattice_graph(7)->num_vertices(), 49u);
  EXPECT_EQ(complete_graph(4)->num_arcs(), 12u);
  EXPECT_THROW(hypercube_graph(0), DomainError);
  EXPECT_THROW(zd_box_graph(2, 3), DomainError);
}

TEST(Presets, TruncationsMarkTheirBoundary) {
  GraphPtr g = birth_death_graph(10);
  ASSERT_TRUE(g->is_truncated());
  EXPECT_EQ(g->boundary_distance(10), 0u);
  GraphPtr tri = triangular_lattice_graph(7);
  ASSERT_TRUE(tri->is_truncated());
  // the centre of a 7x7 rhombus is 3 steps from the cut
  EXPECT_EQ(tri->boundary_distance(3 + 7 * 3), 3u);
  EXPECT_EQ(tri->max_out_degree(), 6u);
}

TEST(Presets, ClosedFormCharacteristicsAgreeWithComputedOnes) {
  std::vector<PresetDescriptor> ps = {birth_death(1.3, 0.6, 12),
                                      hypercube(std::vector<double>{0.5, 1.5, 2.0}),
                                      triangle(),
                                      two_cycle(0.7, 1.9),
                                      complete_graph_sampler({0.4, 0.3, 0.2, 0.1}),
                                      cayley_zd(2, {1.0, 2.0, 0.5, 1.5}, 5),
                                      triangular_lattice_family({1.0, 2.0, 0.5, 1.5, 1.2, 0.8}, 1.3, 0.7, 6)};
  for (const PresetDescriptor& p : ps) {
    const DirectedGraph& g = *p.graph;
    for (ArcId a = 0; a < g.num_arcs(); ++a) {
      if (!g.is_interior_arc(a)) continue;
      EXPECT_NEAR(chi_arc(p.intensity, 0.4, a), p.chi_arc(a), 1e-12) << p.name << " " << g.arc_label(a);
    }
    for (const ClosedWalk& c : enumerate_closed_walks(g, 3)) {
      bool interior = true;
      for (VertexId v : c.vertices()) interior = interior && g.is_interior(v);
      if (!interior) continue;
      EXPECT_NEAR(chi_cycle(p.intensity, 0.4, c) / p.chi_cycle(c), 1.0, 1e-12) << p.name;
    }
  }
}

TEST(Presets, TriangularFaceCharacteristic) {
  std::vector<double> j = {1.0, 2.0, 0.5, 1.5, 1.2, 0.8};
  PresetDescriptor p = triangular_lattice_family(j, 1.3, 0.7, 7);
  const DirectedGraph& g = *p.graph;
  // g1, g2, g3 around a face: (0,0) -> (1,0) -> (0,1) -> (0,0)
  const VertexId c = 3 + 7 * 3;
  ClosedWalk face({c, c + 1, c + 7, c});
  validate_walk(g, face.walk());
  EXPECT_NEAR(chi_cycle(p.intensity, 0.5, face), j[0] * j[2] * j[4], 1e-14);
  EXPECT_NEAR(chi_cycle(*p.partner, 0.5, face), j[0] * j[2] * j[4], 1e-14);
}

TEST(Presets, HypercubeClosedFormsAreConsistent) {
  PresetDescriptor p = hypercube(std::vector<double>{1.0, 2.0});
  // bridge rate = j * exp(psi(z') - psi(z))
  const VertexId y = 3;
  for (double t : {0.0, 0.5, 0.9}) {
    for (ArcId a = 0; a < p.graph->num_arcs(); ++a) {
      const double s = 1.0 - t;
      const double from_psi = p.intensity.rate(t, a) *
                              std::exp(p.potential(s, p.graph->arc(a).dst, y) - p.potential(s, p.graph->arc(a).src, y));
      EXPECT_NEAR(p.bridge_rate(t, a, y) / from_psi, 1.0, 1e-12);
    }
  }
}

TEST(Presets, CompleteGraphSamplerIsReversibleForM) {
  std::vector<double> m = {0.4, 0.3, 0.2, 0.1};
  PresetDescriptor p = complete_graph_sampler(m);
  for (ArcId a = 0; a < p.graph->num_arcs(); ++a) {
    const Arc& e = p.graph->arc(a);
    EXPECT_NEAR(m[e.src] * p.intensity.rate(0.0, a), m[e.dst] * p.intensity.rate(0.0, p.graph->reverse(a)), 1e-15);
  }
  EXPECT_THROW(complete_graph_sampler({0.5, 0.6}), DomainError);
}

TEST(Presets, ByName) {
  for (const std::string& n : preset_names()) EXPECT_NO_THROW(preset_by_name(n, {})) << n;
  PresetDescriptor h = preset_by_name("hypercube", {{"d", "2"}, {"rates", "1:3"}});
  EXPECT_EQ(h.graph->num_vertices(), 4u);
  EXPECT_DOUBLE_EQ(h.intensity.rate_bound(), 4.0);
  PresetDescriptor bd = preset_by_name("birth_death", {{"lambda", "2"}, {"mu", "0.5"}, {"N", "8"}});
  EXPECT_EQ(bd.graph->num_vertices(), 9u);
  EXPECT_THROW(preset_by_name("nope", {}), DomainError);
  EXPECT_THROW(preset_by_name("triangle", {{"x", "1"}}), DomainError);
  EXPECT_THROW(preset_by_name("hypercube", {{"d", "two"}}), DomainError);
  EXPECT_THROW(preset_by_name("hypercube", {{"d", "2"}, {"rates", "1"}}), DomainError);
}

TEST(Presets, TriangleTreeIsThePrescribedOne) {
  PresetDescriptor p = triangle();
  SpanningTree t = preset_tree(p);
  EXPECT_EQ(t.root, 0u);
  EXPECT_EQ(t.parent[2], 1u);
  EXPECT_EQ(t_basis(*p.graph, t).undirected_size(), 4u);
}
