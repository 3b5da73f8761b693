#pragma once

// Reciprocal characteristics and the class-membership decision for Markov intensities.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recip/graph.hpp"
#include "recip/intensity.hpp"

namespace recip {

double chi_arc(const Intensity& k, double t, ArcId a);
double chi_cycle(const Intensity& k, double t, const ClosedWalk& c);

// chi_a on every arc at time t.
std::vector<double> chi_arc_all(const Intensity& k, double t);
// log chi_c, which stays finite where the product would under/overflow.
double log_chi_cycle(const DirectedGraph& g, std::span<const double> rates, const ClosedWalk& c);

// n points uniformly spaced on [delta, 1 - delta].
std::vector<double> default_time_grid(std::size_t n = 257, double delta = 1e-3);

struct Tolerances {
  double arc;
  double cycle;
};
// 1e-6 / 1e-9 for analytic intensities, 1e-3 / 1e-6 otherwise.
Tolerances default_tolerances(const Intensity& j, const Intensity& k);

struct ClassReport {
  bool equal = true;
  double max_arc_residual = 0.0;
  double max_cycle_residual = 0.0;
  std::size_t arcs_checked = 0;
  std::size_t cycles_checked = 0;
  // First (t, object) exceeding a tolerance.
  std::optional<double> violation_time;
  std::string violation_object;
};

struct ClassCheck {
  SpanningTree tree;
  CycleBasis basis;
  std::vector<double> grid;
  Tolerances tol;
  // Objects with a vertex closer than this to a truncation boundary are skipped.
  std::size_t margin = 2;
};

// Root used for default trees: vertex 0, or the vertex farthest from the truncation boundary.
VertexId default_root(const DirectedGraph& g);

ClassCheck default_class_check(const Intensity& j, const Intensity& k);

ClassReport same_class(const Intensity& j, const Intensity& k, const ClassCheck& check);
ClassReport same_class(const Intensity& j, const Intensity& k);

// Diagnostic: every interior arc and every interior closed walk up to max_length.
ClassReport same_class_exhaustive(const Intensity& j, const Intensity& k, std::size_t max_length,
                                  std::span<const double> grid, Tolerances tol, std::size_t margin = 2);

// Time-homogeneous birth-death intensity on {0..N} sharing the characteristics of
// (lambda, mu): lambda~(0) = lambda0, mu~(z+1) = lambda mu / lambda~(z),
// lambda~(z+1) = mu + lambda0 - mu~(z+1).
struct BirthDeathFamily {
  std::vector<double> birth;  // lambda~(z), z = 0..N-1
  std::vector<double> death;  // mu~(z),     z = 1..N (index z-1)
};
BirthDeathFamily birth_death_family_rates(double lambda, double mu, double lambda0, std::size_t N);
IntensitySpec markov_family_birth_death(double lambda, double mu, double lambda0, std::size_t N);

}  // namespace recip
