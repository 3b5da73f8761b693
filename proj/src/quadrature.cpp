#include "recip/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "recip/error.hpp"

namespace recip {

namespace {

GaussLegendre32 build_rule() {
  constexpr int n = 32;
  GaussLegendre32 r{};
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[i] = x;
    r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

double adapt(const std::function<double(double)>& f, double a, double b, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double left = gl32(f, a, m);
  double right = gl32(f, m, b);
  if (std::abs(left + right - whole) <= tol) return left + right;
  if (depth == 0) throw NumericalError("adaptive quadrature did not converge");
  return adapt(f, a, m, left, 0.5 * tol, depth - 1) + adapt(f, m, b, right, 0.5 * tol, depth - 1);
}

}  // namespace

const GaussLegendre32& gauss_legendre_32() {
  static const GaussLegendre32 rule = build_rule();
  return rule;
}

double gl32(const std::function<double(double)>& f, double a, double b) {
  const GaussLegendre32& r = gauss_legendre_32();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 32; ++i) s += r.weights[i] * f(c + h * r.nodes[i]);
  return s * h;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol, int max_depth) {
  if (a == b) return 0.0;
  return adapt(f, a, b, gl32(f, a, b), abs_tol, max_depth);
}

}  // namespace recip
