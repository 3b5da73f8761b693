#pragma once

// Gauss-Legendre rules and an adaptive integrator.

#include <array>
#include <functional>

namespace recip {

struct GaussLegendre32 {
  std::array<double, 32> nodes;    // on [-1, 1]
  std::array<double, 32> weights;
};

const GaussLegendre32& gauss_legendre_32();

// Fixed 32-point rule on [a, b].
double gl32(const std::function<double(double)>& f, double a, double b);

// Bisects until the 32-point estimate on a panel agrees with the sum over its halves to abs_tol.
// Throws NumericalError when max_depth is exhausted.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol = 1e-12,
                          int max_depth = 30);

}  // namespace recip
