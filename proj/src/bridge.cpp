#include "recip/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "recip/error.hpp"
#include "recip/quadrature.hpp"

namespace recip {

Eigen::MatrixXd generator_matrix(const Intensity& j, double t) {
  const DirectedGraph& g = j.graph();
  const std::size_t n = g.num_vertices();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<double> r = j.rates(t);
  for (ArcId a = 0; a < g.num_arcs(); ++a) {
    auto s = static_cast<Eigen::Index>(g.arc(a).src);
    auto d = static_cast<Eigen::Index>(g.arc(a).dst);
    L(s, d) += r[a];
    L(s, s) -= r[a];
  }
  return L;
}

TransitionMatrix transition_matrix(const Intensity& j, double s, double t, Propagator method, double step) {
  check_time(s, j.t_min(), j.t_max());
  check_time(t, j.t_min(), j.t_max());
  if (s > t) throw DomainError("transition_matrix needs s <= t");
  const auto n = static_cast<Eigen::Index>(j.graph().num_vertices());
  TransitionMatrix out{s, t, Eigen::MatrixXd::Identity(n, n)};
  if (s == t) return out;
  switch (method) {
    case Propagator::expm: {
      if (!j.is_time_homogeneous()) throw DomainError("matrix exponential propagator needs a time-homogeneous intensity");
      out.m = (generator_matrix(j, s) * (t - s)).exp();
      break;
    }
    case Propagator::ordered_expm: {
      const double dt = step > 0.0 ? step : 1.0 / 1024.0;
      const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil((t - s) / dt - 1e-9)));
      const double h = (t - s) / static_cast<double>(steps);
      for (std::size_t i = 0; i < steps; ++i) {
        double mid = s + (static_cast<double>(i) + 0.5) * h;
        out.m = out.m * (generator_matrix(j, mid) * h).exp();
      }
      break;
    }
    case Propagator::rk4: {
      const double dt = step > 0.0 ? step : 1.0 / 4096.0;
      const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil((t - s) / dt - 1e-9)));
      const double h = (t - s) / static_cast<double>(steps);
      const bool homogeneous = j.is_time_homogeneous();
      Eigen::MatrixXd L0 = generator_matrix(j, s);
      for (std::size_t i = 0; i < steps; ++i) {
        double r = s + static_cast<double>(i) * h;
        Eigen::MatrixXd La = homogeneous ? L0 : generator_matrix(j, r);
        Eigen::MatrixXd Lm = homogeneous ? L0 : generator_matrix(j, r + 0.5 * h);
        Eigen::MatrixXd Lb = homogeneous ? L0 : generator_matrix(j, std::min(t, r + h));
        Eigen::MatrixXd k1 = out.m * La;
        Eigen::MatrixXd k2 = (out.m + 0.5 * h * k1) * Lm;
        Eigen::MatrixXd k3 = (out.m + 0.5 * h * k2) * Lm;
        Eigen::MatrixXd k4 = (out.m + h * k3) * Lb;
        out.m += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      break;
    }
  }
  if (out.m.minCoeff() < -1e-12) throw NumericalError("transition matrix has a negative entry; integration failed");
  return out;
}

// ---------------------------------------------------------------------------

void BridgeSolution::setup_grid(const BridgeOptions& opt) {
  if (!(opt.delta > 0.0 && opt.delta < 0.5)) throw DomainError("delta must lie in (0, 0.5)");
  if (!(opt.steps_per_unit >= 16.0)) throw DomainError("steps_per_unit must be >= 16");
  if (opt.terminal_substeps == 0) throw DomainError("terminal_substeps must be positive");
  delta_ = opt.delta;
  s_min_ = 0.5 * opt.delta;
  const double span = -std::log(s_min_);
  K_ = static_cast<std::size_t>(std::ceil(opt.steps_per_unit * span));
  dsigma_ = span / static_cast<double>(K_);
  n_ = j_->graph().num_vertices();
  un_.assign((K_ + 1) * n_, 0.0);
  logC_.assign(K_ + 1, 0.0);
  inc_.assign(K_ + 1, 0.0);
}

double BridgeSolution::node_time(std::size_t k) const {
  if (k == K_) return 1.0 - s_min_;
  return -std::expm1(-static_cast<double>(k) * dsigma_);
}

double BridgeSolution::node_remaining(std::size_t k) const {
  if (k == K_) return s_min_;
  return std::exp(-static_cast<double>(k) * dsigma_);
}

void BridgeSolution::apply_generator(double t, std::span<const double> u, std::span<double> out) const {
  const DirectedGraph& g = j_->graph();
  std::vector<double> r = j_->rates(t);
  std::fill(out.begin(), out.end(), 0.0);
  for (ArcId a = 0; a < g.num_arcs(); ++a) {
    const Arc& arc = g.arc(a);
    out[arc.src] += r[a] * (u[arc.dst] - u[arc.src]);
  }
}

void BridgeSolution::rk4_step(std::vector<double>& u, double sigma0, double h) const {
  std::vector<double> k1(n_), k2(n_), k3(n_), k4(n_), tmp(n_);
  auto f = [&](double sigma, std::span<const double> v, std::vector<double>& out) {
    const double s = std::exp(-sigma);
    apply_generator(1.0 - s, v, out);
    for (double& x : out) x *= -s;
  };
  f(sigma0, u, k1);
  for (std::size_t i = 0; i < n_; ++i) tmp[i] = u[i] + 0.5 * h * k1[i];
  f(sigma0 + 0.5 * h, tmp, k2);
  for (std::size_t i = 0; i < n_; ++i) tmp[i] = u[i] + 0.5 * h * k2[i];
  f(sigma0 + 0.5 * h, tmp, k3);
  for (std::size_t i = 0; i < n_; ++i) tmp[i] = u[i] + h * k3[i];
  f(sigma0 + h, tmp, k4);
  for (std::size_t i = 0; i < n_; ++i) u[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

BridgeSolution BridgeSolution::solve(std::shared_ptr<const Intensity> j, VertexId x, VertexId y,
                                     const BridgeOptions& opt) {
  if (!j) throw DomainError("bridge needs a reference intensity");
  const DirectedGraph& g = j->graph();
  if (x >= g.num_vertices() || y >= g.num_vertices()) throw DomainError("bridge endpoint out of range");
  BridgeSolution sol;
  sol.j_ = std::move(j);
  sol.x_ = x;
  sol.y_ = y;
  sol.setup_grid(opt);
  const std::size_t n = sol.n_;

  // Terminal segment [1 - s_min, 1]: frozen-midpoint Taylor exponentials.
  std::size_t ecc = 0;
  for (std::size_t d : g.distances_from(y)) ecc = std::max(ecc, d);
  const std::size_t order = ecc + opt.taylor_margin;
  std::vector<double> u(n, 0.0), term(n), next(n);
  u[y] = 1.0;
  const double dt = sol.s_min_ / static_cast<double>(opt.terminal_substeps);
  for (std::size_t m = 0; m < opt.terminal_substeps; ++m) {
    const double mid = 1.0 - (static_cast<double>(m) + 0.5) * dt;
    term = u;
    for (std::size_t p = 1; p <= order; ++p) {
      sol.apply_generator(mid, term, next);
      for (std::size_t i = 0; i < n; ++i) {
        term[i] = next[i] * dt / static_cast<double>(p);
        u[i] += term[i];
      }
    }
  }

  auto store = [&](std::size_t k, std::vector<double>& v) {
    double mx = *std::max_element(v.begin(), v.end());
    double mn = *std::min_element(v.begin(), v.end());
    if (!(mx > 0.0) || !(mn / mx >= 1e-300)) {
      throw NumericalError("u underflows below 1e-300 at t = " + std::to_string(sol.node_time(k)) +
                           "; target unreachable at this delta");
    }
    for (double& e : v) e /= mx;
    std::copy(v.begin(), v.end(), sol.un_.begin() + static_cast<std::ptrdiff_t>(k * n));
    return std::log(mx);
  };
  sol.logC_[sol.K_] = store(sol.K_, u);
  for (std::size_t k = sol.K_; k-- > 0;) {
    std::vector<double> v(sol.un_.begin() + static_cast<std::ptrdiff_t>((k + 1) * n),
                          sol.un_.begin() + static_cast<std::ptrdiff_t>((k + 2) * n));
    sol.rk4_step(v, static_cast<double>(k + 1) * sol.dsigma_, -sol.dsigma_);
    sol.inc_[k] = store(k, v);
    sol.logC_[k] = sol.logC_[k + 1] + sol.inc_[k];
  }
  sol.finish();
  return sol;
}

BridgeSolution BridgeSolution::from_potential(std::shared_ptr<const Intensity> j, VertexId x, VertexId y,
                                              const std::function<double(double, VertexId)>& psi,
                                              const BridgeOptions& opt) {
  if (!j) throw DomainError("bridge needs a reference intensity");
  BridgeSolution sol;
  sol.j_ = std::move(j);
  sol.x_ = x;
  sol.y_ = y;
  sol.setup_grid(opt);
  const std::size_t n = sol.n_;
  std::vector<double> p(n);
  for (std::size_t k = 0; k <= sol.K_; ++k) {
    const double s = sol.node_remaining(k);
    for (VertexId z = 0; z < n; ++z) p[z] = psi(s, z);
    const double mx = *std::max_element(p.begin(), p.end());
    for (VertexId z = 0; z < n; ++z) sol.un_[k * n + z] = std::exp(p[z] - mx);
    sol.logC_[k] = mx;
  }
  for (std::size_t k = 0; k < sol.K_; ++k) sol.inc_[k] = sol.logC_[k] - sol.logC_[k + 1];
  sol.finish();
  return sol;
}

void BridgeSolution::finish() {
  const DirectedGraph& g = j_->graph();
  bound_ = 0.0;
  std::vector<double> tot(n_);
  for (std::size_t k = 0; k <= K_; ++k) {
    std::vector<double> r = j_->rates(node_time(k));
    std::span<const double> u = scaled_u(k);
    std::fill(tot.begin(), tot.end(), 0.0);
    for (ArcId a = 0; a < g.num_arcs(); ++a) tot[g.arc(a).src] += r[a] * u[g.arc(a).dst] / u[g.arc(a).src];
    bound_ = std::max(bound_, *std::max_element(tot.begin(), tot.end()));
  }
}

BridgeSolution BridgeSolution::perturbed(std::size_t node, VertexId z, double amount) const {
  if (node > K_ || z >= n_) throw DomainError("perturbation index out of range");
  BridgeSolution copy = *this;
  copy.un_[node * n_ + z] *= std::exp(amount);
  return copy;
}

std::vector<double> BridgeSolution::scaled_u_at(double t, double* log_scale_out) const {
  check_time(t, 0.0, t_max());
  const double sigma = -std::log1p(-t);
  auto k = static_cast<std::size_t>(std::floor(sigma / dsigma_));
  if (k >= K_) {
    if (log_scale_out) *log_scale_out = logC_[K_];
    auto u = scaled_u(K_);
    return {u.begin(), u.end()};
  }
  if (sigma == static_cast<double>(k) * dsigma_) {
    if (log_scale_out) *log_scale_out = logC_[k];
    auto u = scaled_u(k);
    return {u.begin(), u.end()};
  }
  auto next = scaled_u(k + 1);
  std::vector<double> v(next.begin(), next.end());
  const double s1 = static_cast<double>(k + 1) * dsigma_;
  rk4_step(v, s1, sigma - s1);
  if (log_scale_out) *log_scale_out = logC_[k + 1];
  return v;
}

std::vector<double> BridgeSolution::log_u_at(double t) const {
  double c = 0.0;
  std::vector<double> v = scaled_u_at(t, &c);
  for (double& e : v) e = std::log(e) + c;
  return v;
}

double BridgeSolution::phi(double t, VertexId z) const {
  return log_u_at(t)[z] - log_u_at(0.0)[x_];
}

void BridgeSolution::rates_at(double t, std::span<double> out) const {
  std::vector<double> u = scaled_u_at(t);
  std::vector<double> r = j_->rates(t);
  const DirectedGraph& g = j_->graph();
  for (ArcId a = 0; a < g.num_arcs(); ++a) out[a] = r[a] * u[g.arc(a).dst] / u[g.arc(a).src];
}

void BridgeSolution::dlog_rates_at(double t, std::span<double> out) const {
  check_time(t, 0.0, t_max());
  const double h = 1e-4 * (1.0 - t);
  const double lo = std::max(0.0, t - h);
  const double hi = std::min(t_max(), t + h);
  std::vector<double> a = rates(lo);
  std::vector<double> b = rates(hi);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (std::log(b[i]) - std::log(a[i])) / (hi - lo);
}

BridgeSolution solve_bridge(const IntensitySpec& j, VertexId x, VertexId y, const BridgeOptions& opt) {
  return BridgeSolution::solve(std::make_shared<IntensitySpec>(j), x, y, opt);
}

double hjb_residual(const BridgeSolution& sol, std::size_t stride) {
  const DirectedGraph& g = sol.graph();
  const std::size_t n = g.num_vertices();
  const std::size_t K = sol.num_nodes() - 1;
  const std::size_t m = std::max<std::size_t>(stride, 1);
  const double h = sol.dsigma() * static_cast<double>(m);
  // log-scale of node k + i relative to node k
  auto offset = [&](std::size_t k, long i) {
    double c = 0.0;
    if (i > 0) {
      for (long q = 0; q < i; ++q) c -= sol.log_scale_increment(k + static_cast<std::size_t>(q));
    } else {
      for (long q = i; q < 0; ++q) c += sol.log_scale_increment(k - static_cast<std::size_t>(-q));
    }
    return c;
  };
  const long M = static_cast<long>(m);
  double worst = 0.0;
  std::vector<double> drift(n);
  for (std::size_t k = 2 * m; k + 2 * m <= K; ++k) {
    const double t = sol.node_time(k);
    const double s = sol.node_remaining(k);
    if (s < sol.delta() * (1.0 - 1e-12)) break;
    const double c_m2 = offset(k, -2 * M);
    const double c_m1 = offset(k, -M);
    const double c_p1 = offset(k, M);
    const double c_p2 = offset(k, 2 * M);
    auto u0 = sol.scaled_u(k);
    auto um2 = sol.scaled_u(k - 2 * m);
    auto um1 = sol.scaled_u(k - m);
    auto up1 = sol.scaled_u(k + m);
    auto up2 = sol.scaled_u(k + 2 * m);
    std::vector<double> r = sol.reference().rates(t);
    std::fill(drift.begin(), drift.end(), 0.0);
    for (ArcId a = 0; a < g.num_arcs(); ++a) {
      drift[g.arc(a).src] += r[a] * (u0[g.arc(a).dst] / u0[g.arc(a).src] - 1.0);
    }
    for (VertexId z = 0; z < n; ++z) {
      const double fm2 = std::log(um2[z] / u0[z]) + c_m2;
      const double fm1 = std::log(um1[z] / u0[z]) + c_m1;
      const double fp1 = std::log(up1[z] / u0[z]) + c_p1;
      const double fp2 = std::log(up2[z] / u0[z]) + c_p2;
      const double dsig = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
      worst = std::max(worst, std::abs(dsig / s + drift[z]));
    }
  }
  return worst;
}

double gradient_residual(const BridgeSolution& sol, const CycleBasis& basis, std::size_t stride) {
  const DirectedGraph& g = sol.graph();
  double worst = 0.0;
  for (std::size_t k = 0; k < sol.num_nodes(); k += std::max<std::size_t>(stride, 1)) {
    const double t = sol.node_time(k);
    if (1.0 - t < sol.delta() * (1.0 - 1e-12)) break;
    std::vector<double> rb = sol.rates(t);
    std::vector<double> rj = sol.reference().rates(t);
    std::vector<double> ell(g.num_arcs());
    for (ArcId a = 0; a < g.num_arcs(); ++a) ell[a] = std::log(rb[a] / rj[a]);
    worst = std::max(worst, max_cycle_residual(g, ArcFunction(std::move(ell)), basis));
  }
  return worst;
}

std::vector<std::vector<double>> bridge_marginals(const BridgeSolution& sol, std::span<const double> times) {
  const DirectedGraph& g = sol.graph();
  const std::size_t n = g.num_vertices();
  std::vector<std::vector<double>> out;
  std::vector<double> p(n, 0.0);
  p[sol.source()] = 1.0;
  double sigma = 0.0;
  const double h_max = sol.dsigma();
  auto f = [&](double sig, const std::vector<double>& v, std::vector<double>& d) {
    const double s = std::exp(-sig);
    const double t = std::min(1.0 - s, sol.t_max());
    std::vector<double> r = sol.rates(t);
    std::fill(d.begin(), d.end(), 0.0);
    for (ArcId a = 0; a < g.num_arcs(); ++a) {
      const double flow = v[g.arc(a).src] * r[a];
      d[g.arc(a).dst] += s * flow;
      d[g.arc(a).src] -= s * flow;
    }
  };
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  double last = -1.0;
  for (double T : times) {
    check_time(T, 0.0, sol.t_max());
    if (T < last) throw DomainError("bridge_marginals needs increasing times");
    last = T;
    const double target = -std::log1p(-T);
    while (sigma < target) {
      const double h = std::min(h_max, target - sigma);
      f(sigma, p, k1);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] + 0.5 * h * k1[i];
      f(sigma + 0.5 * h, tmp, k2);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] + 0.5 * h * k2[i];
      f(sigma + 0.5 * h, tmp, k3);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] + h * k3[i];
      f(sigma + h, tmp, k4);
      for (std::size_t i = 0; i < n; ++i) p[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      sigma += h;
    }
    out.push_back(p);
  }
  return out;
}

std::vector<double> exact_bridge_marginal(const Intensity& j, VertexId x, VertexId y, double t) {
  Eigen::MatrixXd a = transition_matrix(j, 0.0, t, Propagator::expm).m;
  Eigen::MatrixXd b = transition_matrix(j, t, 1.0, Propagator::expm).m;
  Eigen::MatrixXd c = transition_matrix(j, 0.0, 1.0, Propagator::expm).m;
  const auto X = static_cast<Eigen::Index>(x);
  const auto Y = static_cast<Eigen::Index>(y);
  std::vector<double> p(j.graph().num_vertices());
  for (Eigen::Index z = 0; z < static_cast<Eigen::Index>(p.size()); ++z) p[z] = a(X, z) * b(z, Y) / c(X, Y);
  return p;
}

namespace {

double cumulative_total_rate(const Intensity& j, VertexId z, double T) {
  if (j.is_time_homogeneous()) return j.total_rate(0.0, z) * T;
  return integrate_adaptive([&](double t) { return j.total_rate(t, z); }, 0.0, T, 1e-11);
}

}  // namespace

DivergenceReport boundary_divergence_check(const BridgeSolution& sol, std::span<const double> deltas) {
  std::vector<double> ds(deltas.begin(), deltas.end());
  std::sort(ds.begin(), ds.end(), std::greater<>());
  const Intensity& j = sol.reference();
  const std::size_t n = sol.graph().num_vertices();
  const VertexId y = sol.target();
  DivergenceReport rep;
  std::vector<double> log_u0 = sol.log_u_at(0.0);
  std::vector<double> prev(n, -INFINITY);
  double prev_gap = INFINITY;
  const double jy = cumulative_total_rate(j, y, 1.0);
  TransitionMatrix M = transition_matrix(j, 0.0, 1.0, Propagator::rk4);
  const auto Y = static_cast<Eigen::Index>(y);
  rep.target_limit = jy + std::log(M.m(Y, Y));
  rep.printed_limit = jy - std::log(M.m(static_cast<Eigen::Index>(sol.source()), Y));
  for (double d : ds) {
    const double T = 1.0 - d;
    if (T > sol.t_max()) throw DomainError("delta " + std::to_string(d) + " is below the solved range");
    std::vector<double> log_uT = sol.log_u_at(T);
    for (VertexId z = 0; z < n; ++z) {
      const double I = cumulative_total_rate(j, z, T) - (log_uT[z] - log_u0[z]);
      rep.rows.push_back({d, z, I});
      if (z != y && !(I > prev[z])) rep.diverging_monotone = false;
      if (z == y) {
        const double gap = std::abs(I - rep.target_limit);
        if (!(gap < prev_gap)) rep.target_converging = false;
        prev_gap = gap;
      }
      prev[z] = I;
    }
  }
  return rep;
}

std::size_t truncation_radius(double rate_bound, double eps) {
  if (!(rate_bound >= 0.0) || !std::isfinite(rate_bound)) throw DomainError("rate bound must be finite and >= 0");
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  if (rate_bound == 0.0 || eps >= 1.0) return 0;
  // pmf in log space; tail sums accumulated from far out to avoid cancellation
  const auto kmax = static_cast<std::size_t>(rate_bound + 40.0 * std::sqrt(rate_bound) + 200.0);
  std::vector<double> pmf(kmax + 1);
  for (std::size_t k = 0; k <= kmax; ++k) {
    const double kd = static_cast<double>(k);
    pmf[k] = std::exp(-rate_bound + kd * std::log(rate_bound) - std::lgamma(kd + 1.0));
  }
  std::vector<double> tail(kmax + 1, 0.0);  // tail[r] = P(N > r)
  for (std::size_t r = kmax; r-- > 0;) tail[r] = tail[r + 1] + pmf[r + 1];
  for (std::size_t r = 0; r <= kmax; ++r) {
    if (tail[r] < eps) return r;
  }
  throw NumericalError("truncation radius search exceeded its range");
}

std::size_t truncation_radius(const Intensity& j, double eps) { return truncation_radius(j.rate_bound(), eps); }

}  // namespace recip
