#pragma once

// Short-time expansions of one-jump and closed-walk probabilities: quadrature
// oracles, slope fits and Monte Carlo cross-checks.

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "recip/graph.hpp"
#include "recip/intensity.hpp"
#include "recip/simulator.hpp"

namespace recip {

struct ArcProbability {
  double numerator = 0.0;    // jump in [t, t + tau h], exactly one jump in [t, t + h]
  double denominator = 0.0;  // exactly one jump in [t, t + h], to z'
  double ratio() const { return numerator / denominator; }
};

// P(T1 <= t + tau h, X_{t+h} = z', T2 > t + h | X_t = z) and the same without the
// constraint on T1. Adaptive Gauss-Legendre, nested for the inner hazards.
ArcProbability exact_arc_probability(const Intensity& j, double t, double h, ArcId arc, double tau = 0.5);

// P(path follows c with exactly |c| jumps in [t, t + h] | X_t = c.start()).
// Supports |c| <= 4; longer walks throw DomainError.
double exact_cycle_probability(const Intensity& j, double t, double h, const ClosedWalk& c);

// Same event conditioned on X_t = X_{t+h} = c.start().
double exact_cycle_probability_literal(const Intensity& j, double t, double h, const ClosedWalk& c);

using ExpansionTarget = std::variant<ArcId, ClosedWalk>;

struct ExpansionProbe {
  double t = 0.0;
  std::vector<double> hs;      // strictly decreasing
  ExpansionTarget target;
  double tau = 0.5;
  std::vector<double> exact;   // ratio (arc) or probability (cycle)
  std::vector<double> scaled;  // ratio (arc) or probability * |c|! / h^|c| (cycle)
};

std::vector<double> default_h_grid();

// Throws DomainError unless hs is strictly decreasing inside (0, 1 - t).
void check_h_grid(const std::vector<double>& hs, double t);

ExpansionProbe probe_arc(const Intensity& j, double t, ArcId arc, std::vector<double> hs = default_h_grid(),
                         double tau = 0.5);
ExpansionProbe probe_cycle(const Intensity& j, double t, const ClosedWalk& c,
                           std::vector<double> hs = default_h_grid());

struct FitOptions {
  std::size_t points = 3;   // smallest h values used
  double tolerance = 1e-3;  // max fit residual; relative to the intercept for cycles
};

struct FitResult {
  double estimate = 0.0;  // -8 slope (arc) or intercept (cycle)
  double intercept = 0.0;
  double slope = 0.0;
  double max_residual = 0.0;
};

// Throws NumericalError when the residual exceeds the tolerance, or when the arc
// intercept is further than the tolerance from tau.
FitResult fit_characteristic(const ExpansionProbe& probe, const FitOptions& opt = {});

// One Richardson step for an error of the given order: (2^p f(h/2) - f(h)) / (2^p - 1).
double richardson(double f_h, double f_h2, int order);

struct McCheck {
  Estimate mc;
  double oracle = 0.0;
  bool consistent = false;
};

// Monte Carlo estimate of the conditional probability under the literal events.
// Throws DomainError when N < 1000 or the conditioning event is never observed.
McCheck mc_expansion_check(const Intensity& j, double t, double h, const ExpansionTarget& target, std::size_t N,
                           std::uint64_t seed, std::size_t threads = 0, double tau = 0.5);

}  // namespace recip
