#pragma once

// Legendre transform and the Hamiltonian form of a normal-form system:
// phase coordinates z = (x^1..x^n, p_1..p_mbar), bracket
//
//   {x^i, x^j} = 0,  {x^i, p_a} = Z^i_a(x),  {p_a, p_b} = -U^c_ab(x) p_c,
//
// Hamiltonian H(x, p_1..p_m) = p.u - L(x, u) at u = ubar(x, p) (original
// momenta only) and phase drift  (V^i, -D^b_a p_b).  Motion: zdot = Pi grad H + drift.
//
// A pure-gauge closure (mbar = n) can be rewritten in pi = Z^{-T} p, where the
// bracket is canonical and the drift is absorbed into H_P = H(x, Z^T pi) + pi.V.

#include "partlag/control_system.hpp"
#include "partlag/geometry.hpp"
#include "partlag/linalg.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace partlag {

struct LegendreOptions {
  double tol = 1e-12;  // on max |dL/du - p|, relative to max(1, |p|)
  int max_iter = 50;
  double hessian_tol = 1e-10;  // on |det d2L/du du|
  int grid_points = 9;         // per control, for the fallback seed
};

class LegendreError : public std::runtime_error {
 public:
  enum class Kind { SingularHessian, NoConvergence };
  LegendreError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct LegendreResult {
  std::vector<double> u;
  double H = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

/// Solve p = dL/du(x, u) for u by damped Newton and evaluate H = p.u - L.
LegendreResult legendre(const ControlSystem& sys, std::span<const double> x,
                        std::span<const double> p, const LegendreOptions& opts = {});

/// p = dL/du at (x, u).
std::vector<double> momenta_of(const ControlSystem& sys, std::span<const double> x,
                               std::span<const double> u);

/// det of d2L/du du at (x, u).
double hessian_determinant(const ControlSystem& sys, std::span<const double> x,
                           std::span<const double> u);

struct HamiltonizeOptions {
  LegendreOptions legendre;
  /// Negative control: drop the momentum part of the phase drift.
  bool zero_momentum_drift = false;
};

template <class T>
struct PhaseGeometry {
  Mat<T> poisson;
  std::vector<T> drift;
};

class HamiltonianSystem {
 public:
  enum class Kind { General, Canonical };

  static HamiltonianSystem build(const ControlSystem& sys, const ClosureResult& closure,
                                 const HamiltonizeOptions& opts = {});

  Kind kind() const noexcept { return kind_; }
  std::size_t n() const noexcept { return sys_.n; }
  std::size_t m() const noexcept { return sys_.m; }
  std::size_t m_bar() const noexcept { return closure_.m_bar(); }
  std::size_t dim() const noexcept { return n() + m_bar(); }
  const ControlSystem& control() const noexcept { return sys_; }
  const ClosureResult& closure() const noexcept { return closure_; }
  const HamiltonizeOptions& options() const noexcept { return opts_; }
  /// x1..xn followed by p1..p_mbar (pi1..pin for the canonical form).
  std::vector<std::string> coordinate_names() const;

  template <class T>
  PhaseGeometry<T> geometry(std::span<const T> z) const;
  template <class T>
  Mat<T> poisson(std::span<const T> z) const {
    return geometry<T>(z).poisson;
  }
  template <class T>
  std::vector<T> drift(std::span<const T> z) const {
    return geometry<T>(z).drift;
  }

  double hamiltonian(std::span<const double> z) const;
  std::vector<double> hamiltonian_gradient(std::span<const double> z) const;
  /// Controls ubar along the phase point.
  std::vector<double> controls(std::span<const double> z) const;
  /// zdot = Pi grad H + drift.
  std::vector<double> rhs(std::span<const double> z) const;

  /// Canonical form only: original momenta p_a = Z^i_a pi_i and back.
  std::vector<double> to_canonical(std::span<const double> z) const;
  std::vector<double> from_canonical(std::span<const double> w) const;

  friend HamiltonianSystem canonicalize_pure_gauge(const HamiltonianSystem& hs);

 private:
  std::vector<double> general_momenta(std::span<const double> w) const;

  Kind kind_ = Kind::General;
  ControlSystem sys_;
  ClosureResult closure_;
  HamiltonizeOptions opts_;
};

/// Rewrite a pure-gauge system in pi = Z^{-T} p. Throws std::invalid_argument
/// when the closure is not pure gauge.
HamiltonianSystem canonicalize_pure_gauge(const HamiltonianSystem& hs);

/// Scalar function of the phase coordinates written in x1..xn, p1..p_mbar
/// (plus parameters).
class PhaseFunction {
 public:
  PhaseFunction() = default;
  PhaseFunction(const std::string& name, const std::string& source, std::size_t n,
                std::size_t m_bar, const std::map<std::string, double>& parameters);

  const std::string& name() const noexcept { return name_; }
  const std::string& source() const noexcept { return program_.source(); }

  template <class T>
  T eval(std::span<const T> z) const {
    return program_.eval<T>(z);
  }
  double operator()(std::span<const double> z) const { return program_.eval<double>(z); }
  std::vector<double> gradient(std::span<const double> z) const;

 private:
  std::string name_;
  expr::Program program_;
};

/// {F, G} = dF_a Pi^{ab} dG_b at z.
double poisson_bracket(const HamiltonianSystem& hs, std::span<const double> z,
                       std::span<const double> grad_f, std::span<const double> grad_g);

/// max |Pi^{ad} d_d Pi^{bc} + cyclic| at z.
double jacobi_residual(const HamiltonianSystem& hs, std::span<const double> z);

/// max |(L_drift Pi)^{ab}| at z.
double drift_compatibility(const HamiltonianSystem& hs, std::span<const double> z);

/// max over z of max |Pi^{ab} - Pi^{ba}|.
double antisymmetry_residual(const HamiltonianSystem& hs, std::span<const double> z);

struct DriftCheck {
  bool ok = true;
  double max_residual = 0.0;
};

/// Does {z^a, F} reproduce the drift components at every sample (scaled
/// tolerance 1e-8)? If so the full flow is Hamiltonian with H' = H + F.
DriftCheck check_hamiltonian_drift(const HamiltonianSystem& hs, const PhaseFunction& f,
                                   const std::vector<std::vector<double>>& samples,
                                   double tol = 1e-8);

/// Bracket of the canonical coordinates (x, pi(x, p)) computed from the
/// general system's bracket; max deviation from the canonical matrix.
double canonical_bracket_residual(const HamiltonianSystem& general, std::span<const double> z);

// ---- templates ---------------------------------------------------------------

template <class T>
PhaseGeometry<T> HamiltonianSystem::geometry(std::span<const T> z) const {
  const std::size_t nn = n();
  const std::size_t mb = m_bar();
  const std::size_t N = nn + mb;
  if (z.size() != N) {
    throw std::invalid_argument("phase point has dimension " + std::to_string(z.size()) +
                                ", expected " + std::to_string(N));
  }
  PhaseGeometry<T> g{Mat<T>(N, N), std::vector<T>(N, T(0.0))};
  if (kind_ == Kind::Canonical) {
    for (std::size_t i = 0; i < nn; ++i) {
      g.poisson(i, nn + i) = T(1.0);
      g.poisson(nn + i, i) = T(-1.0);
    }
    return g;
  }
  auto sf = closure_.structure_functions_at<T>(z.first(nn));
  auto p = z.subspan(nn);
  for (std::size_t a = 0; a < mb; ++a) {
    for (std::size_t i = 0; i < nn; ++i) {
      g.poisson(i, nn + a) = sf.basis(i, a);
      g.poisson(nn + a, i) = -sf.basis(i, a);
    }
    for (std::size_t b = a + 1; b < mb; ++b) {
      T s(0.0);
      for (std::size_t c = 0; c < mb; ++c) s += sf.U(c, a, b) * p[c];
      g.poisson(nn + b, nn + a) = s;
      g.poisson(nn + a, nn + b) = -s;
    }
  }
  for (std::size_t i = 0; i < nn; ++i) g.drift[i] = sf.drift_value[i];
  if (!opts_.zero_momentum_drift) {
    for (std::size_t a = 0; a < mb; ++a) {
      T s(0.0);
      for (std::size_t b = 0; b < mb; ++b) s += sf.drift(b, a) * p[b];
      g.drift[nn + a] = -s;
    }
  }
  return g;
}

}  // namespace partlag
