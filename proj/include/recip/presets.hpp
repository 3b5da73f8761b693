#pragma once

// Ready-made graphs and intensities with their known closed forms.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "recip/graph.hpp"
#include "recip/intensity.hpp"

namespace recip {

struct PresetDescriptor {
  std::string name;
  std::map<std::string, double> params;
  GraphPtr graph;
  IntensitySpec intensity;
  // Second intensity for presets that come as a pair (j, k).
  std::optional<IntensitySpec> partner;
  // Tree prescribed by the construction; empty means use the default BFS tree.
  std::vector<std::pair<VertexId, VertexId>> tree_edges;
  VertexId tree_root = 0;

  // Closed forms; empty functions mean none is known.
  std::function<double(ArcId)> chi_arc;                  // time-homogeneous cases
  std::function<double(const ClosedWalk&)> chi_cycle;
  std::function<double(double t, ArcId, VertexId y)> bridge_rate;
  // Takes the remaining time s = 1 - t, which keeps relative precision near t = 1.
  std::function<double(double s, VertexId z, VertexId y)> potential;
};

GraphPtr birth_death_graph(std::size_t N);
GraphPtr hypercube_graph(std::size_t d);
// Box {0..L-1}^d with unit steps along each axis.
GraphPtr zd_box_graph(std::size_t d, std::size_t L);
// Rhombus {0..L-1}^2 of the triangular lattice in axial coordinates.
GraphPtr triangular_lattice_graph(std::size_t L);
GraphPtr complete_graph(std::size_t n);

PresetDescriptor birth_death(double lambda, double mu, std::size_t N);
PresetDescriptor hypercube(std::size_t d);
// Translation-invariant rates r_i along direction i.
PresetDescriptor hypercube(const std::vector<double>& rates);
PresetDescriptor triangle();
PresetDescriptor two_cycle(double a_to_b = 1.0, double b_to_a = 1.0);
PresetDescriptor complete_graph_sampler(const std::vector<double>& m);
// rates = {j_1, j_-1, j_2, j_-2, ...}
PresetDescriptor cayley_zd(std::size_t d, const std::vector<double>& rates, std::size_t L);
// j = {j_1, j_-1, j_2, j_-2, j_3, j_-3}; partner holds k.
PresetDescriptor triangular_lattice_family(const std::vector<double>& j, double alpha, double beta, std::size_t L);

// Product criterion for translation-invariant walks on Z^d.
bool zd_product_criterion(const std::vector<double>& j, const std::vector<double>& k, double rel_tol = 1e-12);
// On the hypercube every generator is its own inverse, so the bridges agree only when j = k.
bool hypercube_cayley_rigidity(const std::vector<double>& j, const std::vector<double>& k, double rel_tol = 1e-12);

// Tree of a preset: its prescribed tree when it has one, otherwise BFS from default_root.
SpanningTree preset_tree(const PresetDescriptor& p);

// Lookup by name for the command line. Vector parameters use colon-separated lists.
PresetDescriptor preset_by_name(const std::string& name, const std::map<std::string, std::string>& params);
std::vector<std::string> preset_names();

}  // namespace recip
