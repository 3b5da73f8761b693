#pragma once

// Bridges by h-transform: u_t(z) = P(X_1 = y | X_t = z) solves the backward
// equation du/dt + L_t u = 0 with u_1 = 1{y}, and the bridge jumps with
// rate j(t, z -> z') u_t(z') / u_t(z).

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "recip/intensity.hpp"

namespace recip {

enum class Propagator { rk4, expm, ordered_expm };

struct TransitionMatrix {
  double s = 0.0;
  double t = 0.0;
  Eigen::MatrixXd m;  // m(a, b) = P(X_t = b | X_s = a)
};

Eigen::MatrixXd generator_matrix(const Intensity& j, double t);

// rk4: fixed step `step` on dM/dr = M L_r. expm: exp((t - s) L), time-homogeneous only.
// ordered_expm: product of exp(L(mid) dt) over intervals of length `step` (default 1/1024).
TransitionMatrix transition_matrix(const Intensity& j, double s, double t, Propagator method = Propagator::rk4,
                                   double step = 0.0);

struct BridgeOptions {
  double delta = 1e-3;               // tabulation stops at 1 - delta/2
  double steps_per_unit = 4096.0;    // RK4 steps per unit of sigma = -log(1 - t)
  std::size_t terminal_substeps = 16;
  std::size_t taylor_margin = 8;
};

class BridgeSolution final : public Intensity {
 public:
  static BridgeSolution solve(std::shared_ptr<const Intensity> j, VertexId x, VertexId y,
                              const BridgeOptions& opt = {});
  // Tabulates u = exp(psi) from a known potential on the same grid. psi receives
  // the remaining time s = 1 - t.
  static BridgeSolution from_potential(std::shared_ptr<const Intensity> j, VertexId x, VertexId y,
                                       const std::function<double(double s, VertexId z)>& psi,
                                       const BridgeOptions& opt = {});

  // Copy with phi shifted by `amount` at one grid entry.
  BridgeSolution perturbed(std::size_t node, VertexId z, double amount) const;

  const DirectedGraph& graph() const override { return j_->graph(); }
  void rates_at(double t, std::span<double> out) const override;
  void dlog_rates_at(double t, std::span<double> out) const override;
  double rate_bound() const override { return bound_; }
  bool is_time_homogeneous() const override { return false; }
  bool is_analytic() const override { return false; }
  double t_min() const override { return 0.0; }
  double t_max() const override { return 1.0 - s_min_; }

  const Intensity& reference() const { return *j_; }
  const std::shared_ptr<const Intensity>& reference_ptr() const { return j_; }
  VertexId source() const { return x_; }
  VertexId target() const { return y_; }
  double delta() const { return delta_; }

  std::size_t num_nodes() const { return K_ + 1; }
  double node_time(std::size_t k) const;
  // 1 - node_time(k), computed without cancellation.
  double node_remaining(std::size_t k) const;
  double dsigma() const { return dsigma_; }
  // u at node k scaled so that its largest entry is 1.
  std::span<const double> scaled_u(std::size_t k) const { return {un_.data() + k * n_, n_}; }
  // log of the scale factor at node k: log u = log scaled_u + log_scale(k).
  double log_scale(std::size_t k) const { return logC_[k]; }
  // log_scale(k) - log_scale(k + 1), kept separately for accurate differences.
  double log_scale_increment(std::size_t k) const { return inc_[k]; }

  // u at an arbitrary time in [0, 1 - delta/2], scaled, with its log scale.
  std::vector<double> scaled_u_at(double t, double* log_scale_out = nullptr) const;
  std::vector<double> log_u_at(double t) const;
  // phi_t(z) = log u_t(z) - log u_0(x).
  double phi(double t, VertexId z) const;

 private:
  BridgeSolution() = default;
  void setup_grid(const BridgeOptions& opt);
  void finish();
  // One classical RK4 step of du/dsigma = -s L u from sigma0 to sigma0 + h (h may be negative).
  void rk4_step(std::vector<double>& u, double sigma0, double h) const;
  void apply_generator(double t, std::span<const double> u, std::span<double> out) const;

  std::shared_ptr<const Intensity> j_;
  VertexId x_ = 0;
  VertexId y_ = 0;
  std::size_t n_ = 0;
  double delta_ = 1e-3;
  double s_min_ = 5e-4;
  std::size_t K_ = 0;
  double dsigma_ = 0.0;
  std::vector<double> un_;
  std::vector<double> logC_;
  std::vector<double> inc_;
  double bound_ = 0.0;
};

BridgeSolution solve_bridge(const IntensitySpec& j, VertexId x, VertexId y, const BridgeOptions& opt = {});

// Max |d/dt phi + sum_z' j (e^{phi(z') - phi(z)} - 1)| over grid nodes with t <= 1 - delta.
// d/dt phi uses a 5-point central difference in sigma with spacing stride * dsigma;
// a wider spacing trades truncation error (spacing^4) for less roundoff (1/spacing).
double hjb_residual(const BridgeSolution& sol, std::size_t stride = 8);

// Max over grid nodes (t <= 1 - delta) of the cycle residual of log(j^{xy} / j) on the basis.
double gradient_residual(const BridgeSolution& sol, const CycleBasis& basis, std::size_t stride = 1);

// Marginal laws of the bridge at the requested times, obtained by propagating
// dp/dt = p L^{xy}_t forward from the point mass at x on the solution grid.
std::vector<std::vector<double>> bridge_marginals(const BridgeSolution& sol, std::span<const double> times);

// Exact marginal M_{0,t}(x,z) M_{t,1}(z,y) / M_{0,1}(x,y) using matrix exponentials (time-homogeneous j).
std::vector<double> exact_bridge_marginal(const Intensity& j, VertexId x, VertexId y, double t);

struct DivergenceRow {
  double delta;
  VertexId z;
  double integral;  // int_0^{1-delta} total bridge rate at z
};

struct DivergenceReport {
  std::vector<DivergenceRow> rows;
  bool diverging_monotone = true;      // every z != y grows as delta shrinks
  bool target_converging = true;       // z = y approaches `target_limit` monotonically
  double target_limit = 0.0;           // int_0^1 jbar(t,y) dt + log R^y_1(y)
  double printed_limit = 0.0;          // int_0^1 jbar(t,y) dt - log R^x_1(y)
};

// deltas must be >= the solution's own delta / 2.
DivergenceReport boundary_divergence_check(const BridgeSolution& sol, std::span<const double> deltas);

// Smallest r with P(Poisson(rate_bound) > r) < eps.
std::size_t truncation_radius(double rate_bound, double eps);
std::size_t truncation_radius(const Intensity& j, double eps);

}  // namespace recip
