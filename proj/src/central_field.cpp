#include "partlag/central_field.hpp"

#include <boost/math/constants/constants.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace partlag::central {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

expr::Program potential_program(const Params& p) {
  const std::vector<std::string> slots{"r"};
  return expr::Program::compile(expr::Expr::parse(p.potential), slots, p.bindings());
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

double radial_acceleration(const OrbitClass& c, double r) {
  // m r'' = (M^2 - 8Km)/(m r^3) - alpha/r^2
  return ((c.M * c.M - 8.0 * c.K * c.m) / (c.m * r * r * r) - c.alpha / (r * r)) / c.m;
}

}  // namespace

double Params::U(double r) const {
  const double v[1] = {r};
  return potential_program(*this).eval<double>(v);
}

double Params::dU(double r) const {
  const D1 v[1] = {D1::variable(r, 0, 1)};
  return potential_program(*this).eval<D1>(v).partial(0);
}

bool Params::coulomb() const {
  for (double r : {0.3, 0.7, 1.0, 2.5, 7.0}) {
    const double want = -alpha / r;
    if (std::fabs(U(r) - want) > 1e-14 * std::max(1.0, std::fabs(want))) return false;
  }
  return true;
}

ControlSystem model(const Params& params) {
  if (!(params.m > 0.0)) throw std::invalid_argument("mass must be positive");
  const auto u = expr::Expr::parse(params.potential).rename({{"r", "x1"}});
  const std::string lag = "m*u1^2/2 + x3^2/(2*m*x1^2) - (" + u.str() + ")";
  auto sys = make_control_system("central-field", 3, 1, {{"1", "0", "0"}},
                                 {"0", "x3/(m*x1^2)", "0"}, lag, params.bindings());
  return sys;
}

std::vector<std::vector<double>> default_samples() {
  return {{1.0, 0.0, 1.0}, {2.0, 0.3, -1.0}, {0.7, 1.0, 0.5}, {2.9, -2.5, 1.7}, {0.55, 3.0, -0.8}};
}

HamiltonianSystem hamiltonian_system(const Params& params, const HamiltonizeOptions& opts) {
  const auto sys = model(params);
  return HamiltonianSystem::build(sys, close_distribution(sys, default_samples()), opts);
}

Invariants invariants(std::span<const double> z, const Params& params) {
  if (z.size() != 5) throw std::invalid_argument("central-field phase point has 5 components");
  const double r = z[0];
  if (r == 0.0) throw DomainError("invariants", r, "r = 0");
  const double M = z[2];
  const double p = z[3];
  const double p1 = z[4];
  const double m = params.m;
  Invariants inv;
  inv.M = M;
  inv.K = M * M / (4.0 * m) + r * r * r * p1 / 8.0;
  inv.E = p * p / (2.0 * m) - M * M / (2.0 * m * r * r) - r * p1 / 2.0 + params.U(r);
  return inv;
}

double energy(double r, double rdot, double M, double K, const Params& params) {
  const double m = params.m;
  return m * rdot * rdot / 2.0 + (M * M - 8.0 * K * m) / (2.0 * m * r * r) + params.U(r);
}

std::vector<double> initial_state(double r, double rdot, double phi, double M, double K,
                                  const Params& params) {
  const double m = params.m;
  const double p1 = (K - M * M / (4.0 * m)) * 8.0 / (r * r * r);
  return {r, phi, M, m * rdot, p1};
}

std::vector<PhaseFunction> invariant_functions(const Params& params) {
  const auto u = expr::Expr::parse(params.potential).rename({{"r", "x1"}});
  const auto b = params.bindings();
  return {PhaseFunction("M", "x3", 3, 2, b),
          PhaseFunction("E", "p1^2/(2*m) - x3^2/(2*m*x1^2) - x1*p2/2 + (" + u.str() + ")", 3, 2, b),
          PhaseFunction("K", "x3^2/(4*m) + x1^3*p2/8", 3, 2, b)};
}

std::vector<Observable> invariant_observables(const Params& params) {
  std::vector<Observable> out;
  for (const auto& f : invariant_functions(params)) out.push_back(observable(f));
  return out;
}

std::string to_string(OrbitTag tag) {
  switch (tag) {
    case OrbitTag::PrecessingConic: return "PrecessingConic";
    case OrbitTag::CriticalK: return "CriticalK";
    case OrbitTag::BoundedFallSpiral: return "BoundedFallSpiral";
    case OrbitTag::UnboundSpiralLow: return "UnboundSpiralLow";
    case OrbitTag::UnboundSpiralCritical: return "UnboundSpiralCritical";
    case OrbitTag::UnboundSpiralHigh: return "UnboundSpiralHigh";
  }
  return "?";
}

OrbitClass classify(const Params& params, double M, double E, double K,
                    const ClassifyOptions& opts) {
  if (M == 0.0) throw std::invalid_argument("classify: M = 0 (radial motion) has no orbit class");
  if (!params.coulomb()) throw std::invalid_argument("classify needs the potential -alpha/r");
  OrbitClass c;
  c.M = M;
  c.E = E;
  c.K = K;
  c.m = params.m;
  c.alpha = params.alpha;
  const double m = params.m;
  const double a = params.alpha;
  c.delta = 1.0 - 8.0 * K * m / (M * M);
  if (std::fabs(c.delta) <= opts.critical_tol) {
    c.tag = OrbitTag::CriticalK;
    c.gamma = std::numeric_limits<double>::infinity();
    c.e = 1.0;
    c.p_latus = 0.0;
    return c;
  }
  c.gamma = 1.0 / std::sqrt(std::fabs(c.delta));
  const double g2 = c.gamma * c.gamma;
  c.e = std::sqrt(std::fabs(1.0 + sign(c.delta) * 2.0 * E * M * M / (g2 * m * a * a)));
  c.p_latus = M * M / (g2 * m * a);
  if (c.delta > 0.0) {
    c.tag = OrbitTag::PrecessingConic;
    return c;
  }
  const double threshold = m * a * a * g2 / (2.0 * M * M);
  if (E < 0.0) {
    c.tag = OrbitTag::BoundedFallSpiral;
  } else if (std::fabs(E - threshold) <= opts.energy_tol * std::max(1.0, threshold)) {
    c.tag = OrbitTag::UnboundSpiralCritical;
  } else if (E < threshold) {
    c.tag = OrbitTag::UnboundSpiralLow;
  } else {
    c.tag = OrbitTag::UnboundSpiralHigh;
  }
  return c;
}

OrbitClass classify(const Params& params, const Invariants& inv, const ClassifyOptions& opts) {
  return classify(params, inv.M, inv.E, inv.K, opts);
}

double oracle_r_of_phi(const OrbitClass& c, double phi) {
  double num = c.p_latus;
  double den = 0.0;
  const double th = c.orientation * (phi - c.phi0) / c.gamma;
  switch (c.tag) {
    case OrbitTag::PrecessingConic:
      den = 1.0 + c.e * std::cos(th);
      break;
    case OrbitTag::CriticalK: {
      const double d = phi - c.phi0;
      num = 2.0 * c.M * c.M * c.alpha;
      den = c.m * c.alpha * c.alpha * d * d - 2.0 * c.M * c.M * c.E;
      break;
    }
    case OrbitTag::BoundedFallSpiral:
      den = c.e * c.e * std::cosh(th) - c.e * std::sqrt(c.e * c.e - 1.0) * std::sinh(th) - 1.0;
      break;
    case OrbitTag::UnboundSpiralLow:
      den = c.e * std::cosh(th) - 1.0;
      break;
    case OrbitTag::UnboundSpiralCritical:
      // p e^th / (1 - e^th)
      den = std::exp(-th) - 1.0;
      break;
    case OrbitTag::UnboundSpiralHigh:
      den = c.e * std::sinh(-th) - 1.0;
      break;
  }
  if (!(den > 0.0) || !std::isfinite(den)) {
    throw OutsideOrbit("phi = " + std::to_string(phi) + " is outside the " + to_string(c.tag) +
                       " orbit's angular range");
  }
  return num / den;
}

OrbitClass fit_phase(OrbitClass c, double phi, double r, double rdot) {
  if (!(r > 0.0)) throw std::invalid_argument("fit_phase: r must be positive");
  // Sign of dr/dphi; at a turning point, + means r is about to grow.
  int s = sign(rdot) * sign(c.M);
  if (s == 0) s = sign(radial_acceleration(c, r));
  const double q = c.p_latus / r;
  double th = 0.0;  // orientation * (phi - phi0) / gamma at the fit point
  c.orientation = 1;
  switch (c.tag) {
    case OrbitTag::PrecessingConic: {
      // dr/dth ~ sin(th)
      const double arg = c.e > 0.0 ? std::clamp((q - 1.0) / c.e, -1.0, 1.0) : 1.0;
      th = std::acos(arg);
      if (s < 0) th = -th;
      if (s == 0 && c.e > 0.0) th = 0.0;
      break;
    }
    case OrbitTag::CriticalK: {
      // r = 2M^2 alpha / (m alpha^2 d^2 - 2 M^2 E); dr/dd ~ -d
      const double d2 = (2.0 * c.M * c.M * c.alpha / r + 2.0 * c.M * c.M * c.E) /
                        (c.m * c.alpha * c.alpha);
      const double d = std::sqrt(std::max(0.0, d2));
      c.phi0 = phi - (s > 0 ? -d : d);
      return c;
    }
    case OrbitTag::BoundedFallSpiral:
    case OrbitTag::UnboundSpiralLow: {
      // denominator e cosh(th - ts) - 1, dr/dth ~ -sinh(th - ts)
      const double ts = c.tag == OrbitTag::BoundedFallSpiral ? std::acosh(c.e) : 0.0;
      const double w = std::acosh(std::max(1.0, (q + 1.0) / c.e));
      th = ts + (s > 0 ? -w : w);
      break;
    }
    case OrbitTag::UnboundSpiralCritical:
      // r increases with th
      th = -std::log1p(q);
      c.orientation = s < 0 ? -1 : 1;
      break;
    case OrbitTag::UnboundSpiralHigh:
      th = -std::asinh((q + 1.0) / c.e);
      c.orientation = s < 0 ? -1 : 1;
      break;
  }
  c.phi0 = phi - c.orientation * c.gamma * th;
  return c;
}

Constants constants_from_shape(OrbitTag tag, double gamma, double e, double M,
                               const Params& params) {
  const double m = params.m;
  const double a = params.alpha;
  const double g2 = gamma * gamma;
  const double unit = g2 * m * a * a / (2.0 * M * M);
  Constants out;
  switch (tag) {
    case OrbitTag::PrecessingConic:
      out.K = M * M * (1.0 - 1.0 / g2) / (8.0 * m);
      out.E = (e * e - 1.0) * unit;
      return out;
    case OrbitTag::BoundedFallSpiral:
    case OrbitTag::UnboundSpiralLow:
    case OrbitTag::UnboundSpiralCritical:
      out.K = M * M * (1.0 + 1.0 / g2) / (8.0 * m);
      out.E = (1.0 - e * e) * unit;
      return out;
    case OrbitTag::UnboundSpiralHigh:
      out.K = M * M * (1.0 + 1.0 / g2) / (8.0 * m);
      out.E = (1.0 + e * e) * unit;
      return out;
    case OrbitTag::CriticalK:
      break;
  }
  throw std::invalid_argument("the critical-K orbit has no (gamma, e) shape");
}

ResidualSeries third_order_residual(const Params& params, const Trajectory& traj, double E,
                                    const ResidualOptions& opts) {
  const double m = params.m;
  auto r_at = [&](double t) {
    return opts.smooth ? traj.smooth_state_at(t)[0] : traj.component_at(t, 0);
  };
  std::vector<double> ts;
  for (std::size_t i = 0; i < traj.size(); i += std::max<std::size_t>(1, opts.stride)) {
    ts.push_back(traj.times()[i]);
  }
  for (std::size_t k = 1; k < opts.grid_points; ++k) {
    ts.push_back(traj.t_begin() + (traj.t_end() - traj.t_begin()) * static_cast<double>(k) /
                                      static_cast<double>(opts.grid_points));
  }
  std::sort(ts.begin(), ts.end());
  ResidualSeries out;
  out.names = {"energy"};
  for (const double t : ts) {
    const double d = std::clamp(opts.fd_factor * traj.step_at(t), opts.fd_min, opts.fd_max);
    if (t - 2.0 * d < traj.t_begin() || t + 2.0 * d > traj.t_end()) continue;
    const double r = r_at(t);
    double rd = 0.0, rdd = 0.0;
    if (opts.smooth) {
      const auto v_at = [&](double s) { return traj.smooth_velocity_at(s)[0]; };
      rd = v_at(t);
      rdd = central_diff(v_at, t, d);
    } else {
      rd = central_diff(r_at, t, d);
      rdd = central_diff2(r_at, t, d);
    }
    const double terms[] = {m * r * rdd / 2.0, m * rd * rd / 2.0, params.U(r),
                            r * params.dU(r) / 2.0};
    double v = -E;
    double scale = std::fabs(E);
    for (double x : terms) {
      v += x;
      scale = std::max(scale, std::fabs(x));
    }
    if (opts.normalize) v /= std::max(1.0, scale);
    out.max_abs = std::max(out.max_abs, std::fabs(v));
    out.t.push_back(t);
    out.values.push_back({v});
  }
  if (out.t.empty()) throw InsufficientSamples("trajectory too short for the energy residual");
  return out;
}

std::vector<double> perihelion_angles(const Trajectory& traj) {
  std::vector<double> out;
  for (const auto& ev : traj.events()) {
    if (ev.name == "perihelion") out.push_back(ev.y[traj.dim() == 5 ? 1 : 2]);
  }
  return out;
}

EventSpec perihelion_event(std::size_t component) {
  return {"perihelion", [component](double, std::span<const double> y) { return y[component]; },
          +1, false};
}

EventSpec fall_event(double r_min) {
  return {"r_min", [r_min](double, std::span<const double> y) { return y[0] - r_min; }, -1, true};
}

OdeRhs multiplier_rhs(const Params& params) {
  const auto u = potential_program(params);
  const double m = params.m;
  return [u, m](double, std::span<const double> y) {
    const double r = y[0];
    const double rd = y[1];
    const double phid = y[3];
    const double lamd = y[5];
    if (r == 0.0) throw DomainError("multiplier system", r, "r = 0");
    const D1 rv[1] = {D1::variable(r, 0, 1)};
    const double du = u.eval<D1>(rv).partial(0);
    return std::vector<double>{rd,
                               r * phid * phid - du / m - 2.0 * r * lamd * phid,
                               phid,
                               -2.0 * rd * phid / r,
                               lamd,
                               -2.0 * rd * lamd / r};
  };
}

std::vector<double> multiplier_initial_state(double r, double rdot, double phi, double M, double c,
                                             const Params& params) {
  const double mr2 = params.m * r * r;
  return {r, rdot, phi, M / mr2, 0.0, c / mr2};
}

double multiplier_energy(const Params& params, double r, double rdot, double phidot,
                         double lambdadot) {
  const double m = params.m;
  const double w = phidot - lambdadot;
  return m * rdot * rdot / 2.0 + m * r * r * w * w / 2.0 - m * r * r * lambdadot * lambdadot / 2.0 +
         params.U(r);
}

double multiplier_K(const Params& params, std::span<const double> y) {
  const double m = params.m;
  const double r = y[0];
  const double M = m * r * r * y[3];
  const double rdd = multiplier_rhs(params)(0.0, y)[1];
  return r * r * r / 8.0 * (-m * rdd - params.dU(r) + M * M / (m * r * r * r));
}

}  // namespace partlag::central
