#pragma once

// Jump intensities k(t, z -> z') on a fixed graph.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "recip/graph.hpp"

namespace recip {

using GraphPtr = std::shared_ptr<const DirectedGraph>;

// Common interface of reference intensities and bridge intensities.
// Batch methods fill one value per ArcId.
class Intensity {
 public:
  virtual ~Intensity() = default;

  virtual const DirectedGraph& graph() const = 0;
  virtual void rates_at(double t, std::span<double> out) const = 0;
  virtual void dlog_rates_at(double t, std::span<double> out) const = 0;
  // Upper bound of the total exit rate over the whole time domain.
  virtual double rate_bound() const = 0;
  virtual bool is_time_homogeneous() const = 0;
  // False when derivatives come from finite differences.
  virtual bool is_analytic() const = 0;
  virtual double t_min() const { return 0.0; }
  virtual double t_max() const { return 1.0; }

  // Single-arc evaluation; the default goes through rates_at.
  virtual double rate(double t, ArcId a) const;
  double total_rate(double t, VertexId z) const;
  double dlog_rate_dt(double t, ArcId a) const;
  std::vector<double> rates(double t) const;
  std::vector<double> dlog_rates(double t) const;
  // Total exit rate of every vertex given per-arc rates.
  std::vector<double> totals(std::span<const double> rates) const;
};

enum class ProfileKind { constant, exponential, sinusoid, linear, grid };

// Time profile of one arc.
class Profile {
 public:
  static Profile constant(double value);
  static Profile exponential(double a, double c);                              // a e^{ct}
  static Profile sinusoid(double a, double b, double omega, double phase);     // a + b sin(2 pi omega t + phase)
  static Profile linear(double a, double b);                                   // a + b t
  // Values at t_i = i / (n - 1), n >= 2.
  static Profile grid(std::vector<double> values, double h_fd = 1e-4);

  ProfileKind kind() const { return kind_; }
  double value(double t) const;
  double dlog(double t) const;
  double bound() const { return bound_; }
  double min_value() const { return min_; }
  const std::vector<double>& params() const { return params_; }
  const std::vector<double>& grid_values() const { return values_; }
  double h_fd() const { return h_fd_; }
  bool is_constant() const { return kind_ == ProfileKind::constant; }
  friend bool operator==(const Profile& a, const Profile& b) {
    return a.kind_ == b.kind_ && a.params_ == b.params_ && a.values_ == b.values_;
  }

 private:
  double log_interp(double t) const;

  ProfileKind kind_ = ProfileKind::constant;
  std::vector<double> params_;
  std::vector<double> values_;
  std::vector<double> log_values_;
  std::vector<double> log_slopes_;
  double h_fd_ = 1e-4;
  double bound_ = 0.0;
  double min_ = 0.0;
};

std::string profile_kind_name(ProfileKind k);

class IntensitySpec final : public Intensity {
 public:
  IntensitySpec(GraphPtr graph, std::vector<Profile> profiles);
  static IntensitySpec constant(GraphPtr graph, double value);
  static IntensitySpec constant(GraphPtr graph, std::vector<double> per_arc);

  const DirectedGraph& graph() const override { return *graph_; }
  const GraphPtr& graph_ptr() const { return graph_; }
  void rates_at(double t, std::span<double> out) const override;
  void dlog_rates_at(double t, std::span<double> out) const override;
  double rate(double t, ArcId a) const override;
  double rate_bound() const override { return bound_; }
  bool is_time_homogeneous() const override { return homogeneous_; }
  bool is_analytic() const override { return analytic_; }

  const Profile& profile(ArcId a) const { return profiles_[a]; }
  const std::vector<Profile>& profiles() const { return profiles_; }

  friend bool operator==(const IntensitySpec& a, const IntensitySpec& b) {
    return *a.graph_ == *b.graph_ && a.profiles_ == b.profiles_;
  }

 private:
  GraphPtr graph_;
  std::vector<Profile> profiles_;
  double bound_ = 0.0;
  bool homogeneous_ = true;
  bool analytic_ = true;
};

// Throws DomainError when t lies outside [lo, hi].
void check_time(double t, double lo = 0.0, double hi = 1.0);

}  // namespace recip
