#pragma once

// Planar motion in a central field with angular momentum conserved as a
// constraint. States x = (r, phi, M), one control u = rdot:
//
//   rdot = u,  phidot = M / (m r^2),  Mdot = 0,
//   L = m u^2/2 + M^2/(2 m r^2) - U(r).
//
// The closure adds Z1 = [Z, V] = (0, -2M/(m r^3), 0), so phase points are
// (r, phi, M, p, p1) with p1 the extension momentum. Integrals of motion:
//
//   M,  K = M^2/(4m) + r^3 p1 / 8,  E = p^2/(2m) - M^2/(2 m r^2) - r p1/2 + U(r).
//
// For the Coulomb potential U = -alpha/r the orbit r(phi) is known in closed
// form; the branch depends on the sign of 1 - 8Km/M^2 and on E.

#include "partlag/dynamics.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace partlag::central {

struct Params {
  double m = 1.0;
  double alpha = 1.0;
  /// U(r) in the variable r with parameters m and alpha.
  std::string potential = "-alpha/r";

  std::map<std::string, double> bindings() const { return {{"m", m}, {"alpha", alpha}}; }
  double U(double r) const;
  double dU(double r) const;
  /// U(r) == -alpha/r at a handful of probe radii.
  bool coulomb() const;
};

ControlSystem model(const Params& params = {});
/// Closure samples: r in [0.5, 3], phi in [-pi, pi], M in [0.5, 2].
std::vector<std::vector<double>> default_samples();
HamiltonianSystem hamiltonian_system(const Params& params = {},
                                     const HamiltonizeOptions& opts = {});

struct Invariants {
  double M = 0.0;
  double E = 0.0;
  double K = 0.0;
};

/// z = (r, phi, M, p, p1).
Invariants invariants(std::span<const double> z, const Params& params);
/// E from (r, rdot, M, K): m rdot^2/2 + (M^2 - 8Km)/(2 m r^2) + U(r).
double energy(double r, double rdot, double M, double K, const Params& params);
/// Phase point with p = m rdot and p1 chosen so that the precession parameter is K.
std::vector<double> initial_state(double r, double rdot, double phi, double M, double K,
                                  const Params& params);
/// Phase functions over (x1, x2, x3, p1, p2) for ledgers.
std::vector<PhaseFunction> invariant_functions(const Params& params);
std::vector<Observable> invariant_observables(const Params& params);

enum class OrbitTag {
  PrecessingConic,
  CriticalK,
  BoundedFallSpiral,
  UnboundSpiralLow,
  UnboundSpiralCritical,
  UnboundSpiralHigh
};
std::string to_string(OrbitTag tag);

struct OrbitClass {
  OrbitTag tag = OrbitTag::PrecessingConic;
  double gamma = 1.0;
  double e = 0.0;
  double p_latus = 0.0;
  double phi0 = 0.0;
  /// Sign of (phi - phi0) in the branch formula; the monotone branches
  /// are written for r increasing with phi and flip for the mirror orbit.
  int orientation = 1;
  double M = 0.0;
  double E = 0.0;
  double K = 0.0;
  double m = 1.0;
  double alpha = 1.0;
  /// 1 - 8Km/M^2.
  double delta = 1.0;
};

struct ClassifyOptions {
  /// |1 - 8Km/M^2| at or below this counts as the critical K.
  double critical_tol = 1e-9;
  /// Relative band around E = m alpha^2 gamma^2 / (2 M^2).
  double energy_tol = 1e-12;
};

/// Branch selection for the Coulomb potential. Throws std::invalid_argument
/// for M = 0 or a non-Coulomb potential.
OrbitClass classify(const Params& params, double M, double E, double K,
                    const ClassifyOptions& opts = {});
OrbitClass classify(const Params& params, const Invariants& inv, const ClassifyOptions& opts = {});

class OutsideOrbit : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Closed-form radius; throws OutsideOrbit where the denominator is not positive.
double oracle_r_of_phi(const OrbitClass& cls, double phi);

/// Fix phi0 (and orientation) so the branch passes through (phi, r) with
/// dr/dphi of the sign implied by rdot and M. At a turning point the sign of
/// the radial acceleration picks perihelion or aphelion.
OrbitClass fit_phase(OrbitClass cls, double phi, double r, double rdot);

struct Constants {
  double K = 0.0;
  double E = 0.0;
};
/// Inverse of the gamma/e formulas: the (K, E) that give orbit `tag` with the
/// requested gamma and e at angular momentum M.
Constants constants_from_shape(OrbitTag tag, double gamma, double e, double M, const Params& params);

/// Residual of m r r''/2 + m r'^2/2 + U + r U'/2 = E along r(t) = component 0
/// of the trajectory, derivatives by finite differences of the interpolant.
ResidualSeries third_order_residual(const Params& params, const Trajectory& traj, double E,
                                    const ResidualOptions& opts = {});

/// Angles phi (component 1) at successive perihelia recorded by the
/// "perihelion" event.
std::vector<double> perihelion_angles(const Trajectory& traj);
/// Non-terminal event at rdot crossing zero upward; `component` holds rdot
/// or p.
EventSpec perihelion_event(std::size_t component = 3);
/// Terminal event when r falls to r_min.
EventSpec fall_event(double r_min);

// ---- Lagrange-multiplier formulation ------------------------------------------

/// y = (r, rdot, phi, phidot, lambda, lambdadot): Euler-Lagrange equations of
/// m rdot^2/2 + m r^2 phidot^2/2 - U(r) - lambdadot m r^2 phidot.
OdeRhs multiplier_rhs(const Params& params);
/// Start with phidot = M/(m r^2) and m r^2 lambdadot = c.
std::vector<double> multiplier_initial_state(double r, double rdot, double phi, double M, double c,
                                             const Params& params);
/// Canonical energy of the multiplier action.
double multiplier_energy(const Params& params, double r, double rdot, double phidot,
                         double lambdadot);
/// K from the state: (r^3/8)(-m r'' - U' + M^2/(m r^3)) with r'' from the equations.
double multiplier_K(const Params& params, std::span<const double> y);

}  // namespace partlag::central
