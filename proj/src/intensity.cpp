#include "recip/intensity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "recip/error.hpp"

namespace recip {

void check_time(double t, double lo, double hi) {
  if (!(t >= lo && t <= hi)) {
    throw DomainError("time " + std::to_string(t) + " outside [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  }
}

double Intensity::rate(double t, ArcId a) const {
  std::vector<double> r(graph().num_arcs());
  rates_at(t, r);
  return r[a];
}

double Intensity::total_rate(double t, VertexId z) const {
  std::vector<double> r(graph().num_arcs());
  rates_at(t, r);
  double s = 0.0;
  for (ArcId a : graph().out_arcs(z)) s += r[a];
  return s;
}

double Intensity::dlog_rate_dt(double t, ArcId a) const {
  std::vector<double> r(graph().num_arcs());
  dlog_rates_at(t, r);
  return r[a];
}

std::vector<double> Intensity::rates(double t) const {
  std::vector<double> r(graph().num_arcs());
  rates_at(t, r);
  return r;
}

std::vector<double> Intensity::dlog_rates(double t) const {
  std::vector<double> r(graph().num_arcs());
  dlog_rates_at(t, r);
  return r;
}

std::vector<double> Intensity::totals(std::span<const double> rates) const {
  const DirectedGraph& g = graph();
  std::vector<double> tot(g.num_vertices(), 0.0);
  for (ArcId a = 0; a < g.num_arcs(); ++a) tot[g.arc(a).src] += rates[a];
  return tot;
}

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive and finite");
}

}  // namespace

Profile Profile::constant(double value) {
  require_positive(value, "constant rate");
  Profile p;
  p.kind_ = ProfileKind::constant;
  p.params_ = {value};
  p.bound_ = p.min_ = value;
  return p;
}

Profile Profile::exponential(double a, double c) {
  require_positive(a, "exponential prefactor");
  if (!std::isfinite(c)) throw DomainError("exponential rate must be finite");
  Profile p;
  p.kind_ = ProfileKind::exponential;
  p.params_ = {a, c};
  p.bound_ = a * std::max(1.0, std::exp(c));
  p.min_ = a * std::min(1.0, std::exp(c));
  return p;
}

Profile Profile::sinusoid(double a, double b, double omega, double phase) {
  if (!(a > std::abs(b))) throw DomainError("sinusoid needs a > |b| to stay positive");
  Profile p;
  p.kind_ = ProfileKind::sinusoid;
  p.params_ = {a, b, omega, phase};
  p.bound_ = a + std::abs(b);
  p.min_ = a - std::abs(b);
  return p;
}

Profile Profile::linear(double a, double b) {
  if (!(a > 0.0 && a + b > 0.0)) throw DomainError("linear profile needs a > 0 and a + b > 0");
  Profile p;
  p.kind_ = ProfileKind::linear;
  p.params_ = {a, b};
  p.bound_ = std::max(a, a + b);
  p.min_ = std::min(a, a + b);
  return p;
}

Profile Profile::grid(std::vector<double> values, double h_fd) {
  if (values.size() < 2) throw DomainError("grid profile needs at least 2 values");
  if (!(h_fd > 0.0 && h_fd < 0.25)) throw DomainError("finite-difference step out of range");
  Profile p;
  p.kind_ = ProfileKind::grid;
  p.h_fd_ = h_fd;
  const std::size_t n = values.size();
  p.log_values_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    require_positive(values[i], "grid value");
    p.log_values_[i] = std::log(values[i]);
  }
  // Catmull-Rom tangents in t, one-sided at the ends.
  const double dt = 1.0 / static_cast<double>(n - 1);
  p.log_slopes_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      p.log_slopes_[i] = (p.log_values_[1] - p.log_values_[0]) / dt;
    } else if (i + 1 == n) {
      p.log_slopes_[i] = (p.log_values_[n - 1] - p.log_values_[n - 2]) / dt;
    } else {
      p.log_slopes_[i] = (p.log_values_[i + 1] - p.log_values_[i - 1]) / (2.0 * dt);
    }
  }
  double hi = -INFINITY;
  double lo = INFINITY;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double top = std::max(p.log_values_[i], p.log_values_[i + 1]) +
                 (4.0 / 27.0) * dt * (std::abs(p.log_slopes_[i]) + std::abs(p.log_slopes_[i + 1]));
    double bot = std::min(p.log_values_[i], p.log_values_[i + 1]) -
                 (4.0 / 27.0) * dt * (std::abs(p.log_slopes_[i]) + std::abs(p.log_slopes_[i + 1]));
    hi = std::max(hi, top);
    lo = std::min(lo, bot);
  }
  p.bound_ = std::exp(hi);
  p.min_ = std::exp(lo);
  p.values_ = std::move(values);
  return p;
}

double Profile::log_interp(double t) const {
  const std::size_t n = log_values_.size();
  const double dt = 1.0 / static_cast<double>(n - 1);
  double x = std::clamp(t, 0.0, 1.0) / dt;
  std::size_t i = std::min(static_cast<std::size_t>(x), n - 2);
  double s = x - static_cast<double>(i);
  if (s == 0.0) return log_values_[i];
  double s2 = s * s;
  double s3 = s2 * s;
  double h00 = 2 * s3 - 3 * s2 + 1;
  double h10 = s3 - 2 * s2 + s;
  double h01 = -2 * s3 + 3 * s2;
  double h11 = s3 - s2;
  return h00 * log_values_[i] + h10 * dt * log_slopes_[i] + h01 * log_values_[i + 1] + h11 * dt * log_slopes_[i + 1];
}

double Profile::value(double t) const {
  switch (kind_) {
    case ProfileKind::constant:
      return params_[0];
    case ProfileKind::exponential:
      return params_[0] * std::exp(params_[1] * t);
    case ProfileKind::sinusoid:
      return params_[0] + params_[1] * std::sin(2.0 * std::numbers::pi * params_[2] * t + params_[3]);
    case ProfileKind::linear:
      return params_[0] + params_[1] * t;
    case ProfileKind::grid: {
      const std::size_t n = values_.size();
      const double x = t * static_cast<double>(n - 1);
      const double r = std::round(x);
      if (x == r && r >= 0.0 && r <= static_cast<double>(n - 1)) return values_[static_cast<std::size_t>(r)];
      return std::exp(log_interp(t));
    }
  }
  return 0.0;
}

double Profile::dlog(double t) const {
  switch (kind_) {
    case ProfileKind::constant:
      return 0.0;
    case ProfileKind::exponential:
      return params_[1];
    case ProfileKind::sinusoid: {
      const double w = 2.0 * std::numbers::pi * params_[2];
      return params_[1] * w * std::cos(w * t + params_[3]) / value(t);
    }
    case ProfileKind::linear:
      return params_[1] / value(t);
    case ProfileKind::grid: {
      const double h = h_fd_;
      if (t - h < 0.0) return (log_interp(t + h) - log_interp(t)) / h;
      if (t + h > 1.0) return (log_interp(t) - log_interp(t - h)) / h;
      return (log_interp(t + h) - log_interp(t - h)) / (2.0 * h);
    }
  }
  return 0.0;
}

std::string profile_kind_name(ProfileKind k) {
  switch (k) {
    case ProfileKind::constant: return "constant";
    case ProfileKind::exponential: return "exponential";
    case ProfileKind::sinusoid: return "sinusoid";
    case ProfileKind::linear: return "linear";
    case ProfileKind::grid: return "grid";
  }
  return "?";
}

IntensitySpec::IntensitySpec(GraphPtr graph, std::vector<Profile> profiles)
    : graph_(std::move(graph)), profiles_(std::move(profiles)) {
  if (!graph_) throw DomainError("intensity needs a graph");
  if (profiles_.size() != graph_->num_arcs()) {
    throw DomainError("intensity has " + std::to_string(profiles_.size()) + " profiles for " +
                      std::to_string(graph_->num_arcs()) + " arcs");
  }
  std::vector<double> vertex_bound(graph_->num_vertices(), 0.0);
  for (ArcId a = 0; a < profiles_.size(); ++a) {
    const Profile& p = profiles_[a];
    if (!(p.min_value() > 0.0)) throw DomainError("rate on arc " + graph_->arc_label(a) + " is not positive");
    vertex_bound[graph_->arc(a).src] += p.bound();
    homogeneous_ = homogeneous_ && p.is_constant();
    analytic_ = analytic_ && p.kind() != ProfileKind::grid;
  }
  bound_ = *std::max_element(vertex_bound.begin(), vertex_bound.end());
}

IntensitySpec IntensitySpec::constant(GraphPtr graph, double value) {
  std::vector<Profile> p(graph->num_arcs(), Profile::constant(value));
  return IntensitySpec(std::move(graph), std::move(p));
}

IntensitySpec IntensitySpec::constant(GraphPtr graph, std::vector<double> per_arc) {
  std::vector<Profile> p;
  p.reserve(per_arc.size());
  for (double v : per_arc) p.push_back(Profile::constant(v));
  return IntensitySpec(std::move(graph), std::move(p));
}

void IntensitySpec::rates_at(double t, std::span<double> out) const {
  check_time(t);
  for (ArcId a = 0; a < profiles_.size(); ++a) out[a] = profiles_[a].value(t);
}

double IntensitySpec::rate(double t, ArcId a) const {
  check_time(t);
  return profiles_.at(a).value(t);
}

void IntensitySpec::dlog_rates_at(double t, std::span<double> out) const {
  check_time(t);
  for (ArcId a = 0; a < profiles_.size(); ++a) out[a] = profiles_[a].dlog(t);
}

}  // namespace recip
