#pragma once

// Dormand-Prince 5(4) integration with dense output and event location, the
// trajectory container, and residuals of the conditional-extremum equations
// evaluated along trajectories.

#include "partlag/hamiltonize.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace partlag {

using OdeRhs = std::function<std::vector<double>(double t, std::span<const double> y)>;

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_initial = 0.0;  // 0: automatic
  double h_max = 0.0;      // 0: unbounded
  double h_min = 1e-14;    // relative to max(1, |t|)
  std::size_t max_steps = 5'000'000;
  /// Take steps of exactly h_initial with no error control.
  bool fixed_step = false;
  double event_tol = 1e-10;
};

struct EventSpec {
  std::string name;
  std::function<double(double t, std::span<const double> y)> g;
  /// -1: only falling crossings, +1: only rising, 0: both.
  int direction = 0;
  bool terminal = true;
};

struct EventRecord {
  std::string name;
  double t = 0.0;
  std::vector<double> y;
};

struct Observable {
  std::string name;
  std::function<double(std::span<const double> y)> f;
};

class IntegrationError : public std::runtime_error {
 public:
  enum class Kind { StepUnderflow, NonFinite, TooManySteps };
  IntegrationError(Kind kind, double t, std::vector<double> y, const std::string& what)
      : std::runtime_error(what), kind_(kind), t_(t), y_(std::move(y)) {}
  Kind kind() const noexcept { return kind_; }
  const char* kind_name() const noexcept;
  double t() const noexcept { return t_; }
  const std::vector<double>& state() const noexcept { return y_; }

 private:
  Kind kind_;
  double t_;
  std::vector<double> y_;
};

class Trajectory {
 public:
  enum class Termination { TEnd, Event };

  std::size_t size() const noexcept { return t_.size(); }
  std::size_t dim() const noexcept { return y_.empty() ? 0 : y_.front().size(); }
  const std::vector<double>& times() const noexcept { return t_; }
  const std::vector<std::vector<double>>& states() const noexcept { return y_; }
  double t_begin() const { return t_.front(); }
  double t_end() const { return t_.back(); }
  /// Accepted step sizes and scaled error estimates, one per step.
  const std::vector<double>& step_sizes() const noexcept { return h_; }
  const std::vector<double>& error_estimates() const noexcept { return err_; }
  Termination termination() const noexcept { return termination_; }
  const std::vector<EventRecord>& events() const noexcept { return events_; }
  std::size_t rejected_steps() const noexcept { return rejected_; }
  std::size_t rhs_evaluations() const noexcept { return nfev_; }

  const std::vector<std::string>& ledger_names() const noexcept { return ledger_names_; }
  /// ledger()[k][i]: observable k at sample i.
  const std::vector<std::vector<double>>& ledger() const noexcept { return ledger_; }
  const std::vector<double>& ledger(const std::string& name) const;

  /// Dense output at t in [t_begin, t_end].
  std::vector<double> state_at(double t) const;
  double component_at(double t, std::size_t i) const;
  /// Local step size at t.
  double step_at(double t) const;
  /// Degree-7 Hermite interpolant through the four accepted steps around t
  /// (values and derivatives). Smoother than state_at across step
  /// boundaries; used for derivative reconstruction.
  std::vector<double> smooth_state_at(double t) const;
  /// Time derivative of the same interpolant.
  std::vector<double> smooth_velocity_at(double t) const;

  /// Copy with component i multiplied by `factor` in every sample and in the
  /// dense output.
  Trajectory perturbed(std::size_t component, double factor) const;

  /// Re-evaluate the ledger with a new set of observables.
  void set_ledger(const std::vector<Observable>& observables);

 private:
  friend Trajectory integrate_ode(const OdeRhs&, std::vector<double>, double, double,
                                  const OdeOptions&, const std::vector<EventSpec>&,
                                  const std::vector<Observable>&);
  struct Segment {
    double t0 = 0.0;
    double h = 0.0;
    std::array<std::vector<double>, 5> r;  // contd5 coefficients
    std::vector<double> eval(double t) const;
    double eval(double t, std::size_t i) const;
  };
  std::size_t segment_index(double t) const;
  std::vector<double> hermite(double t, bool derivative) const;

  std::vector<double> t_;
  std::vector<std::vector<double>> y_;
  std::vector<std::vector<double>> dy_;  // derivative at each sample
  std::vector<double> h_;
  std::vector<double> err_;
  std::vector<Segment> segments_;
  Termination termination_ = Termination::TEnd;
  std::vector<EventRecord> events_;
  std::vector<std::string> ledger_names_;
  std::vector<std::vector<double>> ledger_;
  std::size_t rejected_ = 0;
  std::size_t nfev_ = 0;
};

/// Integrate y' = f(t, y) from t0 to t1 (t1 > t0).
Trajectory integrate_ode(const OdeRhs& f, std::vector<double> y0, double t0, double t1,
                         const OdeOptions& opts = {}, const std::vector<EventSpec>& events = {},
                         const std::vector<Observable>& ledger = {});

/// zdot = Pi grad H + drift.
Trajectory integrate(const HamiltonianSystem& hs, std::vector<double> z0, double t0, double t1,
                     const OdeOptions& opts = {}, const std::vector<EventSpec>& events = {},
                     const std::vector<Observable>& ledger = {});

/// Observable from a phase function.
Observable observable(const PhaseFunction& f);

// ---- residuals ---------------------------------------------------------------

struct ResidualOptions {
  /// Finite-difference step = fd_factor * local integrator step, clamped.
  double fd_factor = 0.5;
  double fd_min = 1e-10;
  double fd_max = 5e-2;
  /// Evaluate at every stride-th accepted step.
  std::size_t stride = 1;
  /// Also evaluate on this many evenly spaced times.
  std::size_t grid_points = 200;
  /// Reconstruct x(t) and xdot(t) from the Hermite interpolant instead of
  /// finite differences of the integrator's native dense output.
  bool smooth = true;
  /// Divide each equation by max(1, its largest term).
  bool normalize = true;
};

struct ResidualSeries {
  std::vector<std::string> names;
  std::vector<double> t;
  std::vector<std::vector<double>> values;  // values[i][k]: component k at t[i]
  double max_abs = 0.0;
  /// max_abs restricted to each component.
  std::vector<double> max_by_component() const;
};

class InsufficientSamples : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Residual of the conditional-extremum equations along a trajectory given in
/// the general phase coordinates (x, p). Controls are reconstructed from
/// xdot by least squares against Z, so the equation part depends on x(t)
/// only; the trajectory's momenta are compared against the reconstructed
/// ones. Components, each normalized by max(1, largest term):
///   eq_a      conditional-extremum equation for generator a
///   mom_a     p_a(trajectory) - p_a(reconstructed), all mbar momenta
///   con       max |xdot - Z u - V|
/// Supports integrable closures (mbar = m) and the one-step pattern.
ResidualSeries conditional_residual(const HamiltonianSystem& hs, const Trajectory& traj,
                                    const ResidualOptions& opts = {});
ResidualSeries conditional_residual(const ControlSystem& sys, const ClosureResult& closure,
                                    const Trajectory& traj, const ResidualOptions& opts = {});

/// For pure-gauge systems: Z^i_a (dLag/dx^i - d/dt dLag/dv^i) with
/// Lag(x, v) = L(x, Z^{-1}(v - V)), from x(t) alone.
ResidualSeries euler_lagrange_residual(const HamiltonianSystem& hs, const Trajectory& traj,
                                       const ResidualOptions& opts = {});

/// 4th-order central first derivative of f at t with step d.
double central_diff(const std::function<double(double)>& f, double t, double d);
std::vector<double> central_diff(const std::function<std::vector<double>(double)>& f, double t,
                                 double d);
/// 4th-order central second derivative.
double central_diff2(const std::function<double(double)>& f, double t, double d);

}  // namespace partlag
