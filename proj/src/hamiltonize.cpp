#include "partlag/hamiltonize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace partlag {

namespace {

struct Derivs {
  std::vector<double> grad;
  Mat<double> hess;
};

// dL/du and d2L/du du at (x, u), exact by nested duals.
Derivs control_derivatives(const ControlSystem& sys, std::span<const double> x,
                           std::span<const double> u) {
  const std::size_t m = u.size();
  std::vector<D2> xs(x.begin(), x.end());
  std::vector<D2> us;
  us.reserve(m);
  for (std::size_t a = 0; a < m; ++a) us.push_back(D2::variable(D1::variable(u[a], a, m), a, m));
  const D2 l = sys.L<D2>(xs, us);
  Derivs d{std::vector<double>(m), Mat<double>(m, m)};
  for (std::size_t a = 0; a < m; ++a) {
    const D1 da = l.partial(a);
    d.grad[a] = da.value();
    for (std::size_t b = 0; b < m; ++b) d.hess(a, b) = da.partial(b);
  }
  return d;
}

// dL/du only.
std::vector<double> control_gradient(const ControlSystem& sys, std::span<const double> x,
                                     std::span<const double> u) {
  const std::size_t m = u.size();
  std::vector<D1> xs(x.begin(), x.end());
  std::vector<D1> us;
  us.reserve(m);
  for (std::size_t a = 0; a < m; ++a) us.push_back(D1::variable(u[a], a, m));
  const D1 l = sys.L<D1>(xs, us);
  std::vector<double> g(m);
  for (std::size_t a = 0; a < m; ++a) g[a] = l.partial(a);
  return g;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r = std::max(r, std::fabs(a[i] - b[i]));
  return r;
}

double max_abs(std::span<const double> a) {
  double r = 0.0;
  for (double v : a) r = std::max(r, std::fabs(v));
  return r;
}

// Damped Newton from `u`; returns false on stall.
bool newton(const ControlSystem& sys, std::span<const double> x, std::span<const double> p,
            const LegendreOptions& opts, std::vector<double>& u, int& iterations,
            double& residual) {
  const double scale = std::max(1.0, max_abs(p));
  Derivs d = control_derivatives(sys, x, u);
  residual = max_abs_diff(d.grad, p);
  for (int it = 0; it < opts.max_iter; ++it) {
    if (!std::isfinite(residual)) return false;
    const double det = determinant(d.hess);
    if (!(std::fabs(det) > opts.hessian_tol)) {
      throw LegendreError(LegendreError::Kind::SingularHessian,
                          "Hessian d2L/du du is singular (|det| = " + std::to_string(std::fabs(det)) +
                              ")");
    }
    if (residual <= opts.tol * scale) {
      iterations = it;
      return true;
    }
    std::vector<double> rhs(u.size());
    for (std::size_t a = 0; a < u.size(); ++a) rhs[a] = p[a] - d.grad[a];
    const auto delta = solve_square(d.hess, rhs);
    double lambda = 1.0;
    bool improved = false;
    for (int k = 0; k < 30; ++k, lambda *= 0.5) {
      std::vector<double> trial(u);
      for (std::size_t a = 0; a < u.size(); ++a) trial[a] += lambda * delta[a];
      try {
        auto g = control_gradient(sys, x, trial);
        const double r = max_abs_diff(g, p);
        if (std::isfinite(r) && r < residual) {
          u = std::move(trial);
          d.grad = std::move(g);
          residual = r;
          improved = true;
          break;
        }
      } catch (const DomainError&) {
      }
    }
    if (improved && residual > opts.tol * scale) d = control_derivatives(sys, x, u);
    if (!improved) return false;
  }
  return false;
}

}  // namespace

std::vector<double> momenta_of(const ControlSystem& sys, std::span<const double> x,
                               std::span<const double> u) {
  std::vector<D1> xs(x.begin(), x.end());
  std::vector<D1> us;
  for (std::size_t a = 0; a < u.size(); ++a) us.push_back(D1::variable(u[a], a, u.size()));
  const D1 l = sys.L<D1>(xs, us);
  std::vector<double> p(u.size());
  for (std::size_t a = 0; a < u.size(); ++a) p[a] = l.partial(a);
  return p;
}

double hessian_determinant(const ControlSystem& sys, std::span<const double> x,
                           std::span<const double> u) {
  return determinant(control_derivatives(sys, x, u).hess);
}

LegendreResult legendre(const ControlSystem& sys, std::span<const double> x,
                        std::span<const double> p, const LegendreOptions& opts) {
  if (x.size() != sys.n || p.size() != sys.m) {
    throw std::invalid_argument("legendre: expected " + std::to_string(sys.n) + " states and " +
                                std::to_string(sys.m) + " momenta");
  }
  LegendreResult res;
  res.u.assign(sys.m, 0.0);
  bool ok = newton(sys, x, p, opts, res.u, res.iterations, res.residual);
  if (!ok && opts.grid_points > 1 && sys.m <= 3) {
    // Coarse grid over the control box for a better seed.
    const int g = opts.grid_points;
    std::size_t total = 1;
    for (std::size_t a = 0; a < sys.m; ++a) total *= static_cast<std::size_t>(g);
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> seed(sys.m, 0.0);
    std::vector<double> u(sys.m);
    for (std::size_t k = 0; k < total; ++k) {
      std::size_t idx = k;
      for (std::size_t a = 0; a < sys.m; ++a) {
        const auto [lo, hi] = a < sys.control_box.size() ? sys.control_box[a]
                                                         : std::pair{-10.0, 10.0};
        u[a] = lo + (hi - lo) * static_cast<double>(idx % g) / (g - 1);
        idx /= g;
      }
      try {
        const double r = max_abs_diff(control_derivatives(sys, x, u).grad, p);
        if (r < best) {
          best = r;
          seed = u;
        }
      } catch (const DomainError&) {
      }
    }
    res.u = seed;
    ok = newton(sys, x, p, opts, res.u, res.iterations, res.residual);
  }
  if (!ok) {
    throw LegendreError(LegendreError::Kind::NoConvergence,
                        "Legendre inversion did not converge in " + std::to_string(opts.max_iter) +
                            " iterations (residual " + std::to_string(res.residual) + ")");
  }
  double pu = 0.0;
  for (std::size_t a = 0; a < sys.m; ++a) pu += p[a] * res.u[a];
  res.H = pu - sys.L<double>(x, res.u);
  return res;
}

// ---- HamiltonianSystem ---------------------------------------------------------

HamiltonianSystem HamiltonianSystem::build(const ControlSystem& sys, const ClosureResult& closure,
                                           const HamiltonizeOptions& opts) {
  if (closure.n() != sys.n || closure.m() != sys.m) {
    throw std::invalid_argument("closure does not belong to this control system");
  }
  HamiltonianSystem hs;
  hs.sys_ = sys;
  hs.closure_ = closure;
  hs.opts_ = opts;
  return hs;
}

std::vector<std::string> HamiltonianSystem::coordinate_names() const {
  auto names = expr::indexed_names("x", n());
  for (const auto& p : expr::indexed_names(kind_ == Kind::Canonical ? "pi" : "p", m_bar())) {
    names.push_back(p);
  }
  return names;
}

std::vector<double> HamiltonianSystem::general_momenta(std::span<const double> w) const {
  // p_a = Z^i_a(x) pi_i over the original generators.
  auto x = w.first(n());
  auto pi = w.subspan(n());
  std::vector<double> p(m(), 0.0);
  for (std::size_t a = 0; a < m(); ++a) {
    const auto z = closure_.basis()[a](x);
    for (std::size_t i = 0; i < n(); ++i) p[a] += z[i] * pi[i];
  }
  return p;
}

std::vector<double> HamiltonianSystem::controls(std::span<const double> z) const {
  if (kind_ == Kind::Canonical) {
    return legendre(sys_, z.first(n()), general_momenta(z), opts_.legendre).u;
  }
  return legendre(sys_, z.first(n()), z.subspan(n(), m()), opts_.legendre).u;
}

double HamiltonianSystem::hamiltonian(std::span<const double> z) const {
  if (z.size() != dim()) throw std::invalid_argument("phase point of wrong dimension");
  auto x = z.first(n());
  if (kind_ == Kind::Canonical) {
    double h = legendre(sys_, x, general_momenta(z), opts_.legendre).H;
    const auto v = closure_.drift()(x);
    for (std::size_t i = 0; i < n(); ++i) h += z[n() + i] * v[i];
    return h;
  }
  return legendre(sys_, x, z.subspan(n(), m()), opts_.legendre).H;
}

std::vector<double> HamiltonianSystem::hamiltonian_gradient(std::span<const double> z) const {
  if (z.size() != dim()) throw std::invalid_argument("phase point of wrong dimension");
  const std::size_t nn = n();
  auto x = z.first(nn);
  const auto u = controls(z);
  // dH/dx = -dL/dx at fixed ubar (envelope).
  std::vector<D1> xs;
  for (std::size_t i = 0; i < nn; ++i) xs.push_back(D1::variable(x[i], i, nn));
  std::vector<D1> us(u.begin(), u.end());
  const D1 l = sys_.L<D1>(xs, us);
  std::vector<double> g(dim(), 0.0);
  for (std::size_t i = 0; i < nn; ++i) g[i] = -l.partial(i);
  if (kind_ == Kind::General) {
    for (std::size_t a = 0; a < m(); ++a) g[nn + a] = u[a];
    return g;
  }
  auto pi = z.subspan(nn);
  for (std::size_t a = 0; a < m(); ++a) {
    const auto j = jet<double>(closure_.basis()[a], x);
    for (std::size_t i = 0; i < nn; ++i) {
      g[nn + i] += u[a] * j.value[i];
      for (std::size_t k = 0; k < nn; ++k) g[k] += u[a] * pi[i] * j.jacobian(i, k);
    }
  }
  const auto jv = jet<double>(closure_.drift(), x);
  for (std::size_t i = 0; i < nn; ++i) {
    g[nn + i] += jv.value[i];
    for (std::size_t k = 0; k < nn; ++k) g[k] += pi[i] * jv.jacobian(i, k);
  }
  return g;
}

std::vector<double> HamiltonianSystem::rhs(std::span<const double> z) const {
  const auto geo = geometry<double>(z);
  const auto g = hamiltonian_gradient(z);
  std::vector<double> out(geo.drift);
  const std::size_t N = dim();
  for (std::size_t a = 0; a < N; ++a) {
    double s = 0.0;
    for (std::size_t b = 0; b < N; ++b) s += geo.poisson(a, b) * g[b];
    out[a] += s;
  }
  return out;
}

std::vector<double> HamiltonianSystem::to_canonical(std::span<const double> z) const {
  if (kind_ != Kind::Canonical) throw std::logic_error("to_canonical on a general system");
  const std::size_t nn = n();
  auto x = z.first(nn);
  Mat<double> zt(nn, nn);
  for (std::size_t a = 0; a < nn; ++a) {
    const auto v = closure_.basis()[a](x);
    for (std::size_t i = 0; i < nn; ++i) zt(a, i) = v[i];
  }
  auto pi = solve_square(zt, std::vector<double>(z.begin() + nn, z.end()));
  std::vector<double> w(x.begin(), x.end());
  w.insert(w.end(), pi.begin(), pi.end());
  return w;
}

std::vector<double> HamiltonianSystem::from_canonical(std::span<const double> w) const {
  if (kind_ != Kind::Canonical) throw std::logic_error("from_canonical on a general system");
  const std::size_t nn = n();
  auto x = w.first(nn);
  std::vector<double> z(x.begin(), x.end());
  for (std::size_t a = 0; a < nn; ++a) {
    const auto v = closure_.basis()[a](x);
    double s = 0.0;
    for (std::size_t i = 0; i < nn; ++i) s += v[i] * w[nn + i];
    z.push_back(s);
  }
  return z;
}

HamiltonianSystem canonicalize_pure_gauge(const HamiltonianSystem& hs) {
  if (hs.kind() == HamiltonianSystem::Kind::Canonical) return hs;
  if (!hs.closure().pure_gauge()) {
    throw std::invalid_argument("system is not pure gauge (mbar = " + std::to_string(hs.m_bar()) +
                                " < n = " + std::to_string(hs.n()) + ")");
  }
  for (const auto& s : hs.closure().samples()) {
    Mat<double> z(hs.n(), hs.n());
    for (std::size_t a = 0; a < hs.n(); ++a) {
      const auto v = hs.closure().basis()[a](s);
      for (std::size_t i = 0; i < hs.n(); ++i) z(i, a) = v[i];
    }
    if (!(std::fabs(determinant(z)) > hs.options().legendre.hessian_tol)) {
      throw DegenerateBasis(s, {}, 0.0);
    }
  }
  HamiltonianSystem out = hs;
  out.kind_ = HamiltonianSystem::Kind::Canonical;
  return out;
}

// ---- phase functions and identities ------------------------------------------

PhaseFunction::PhaseFunction(const std::string& name, const std::string& source, std::size_t n,
                             std::size_t m_bar, const std::map<std::string, double>& parameters)
    : name_(name) {
  auto slots = expr::indexed_names("x", n);
  for (const auto& p : expr::indexed_names("p", m_bar)) slots.push_back(p);
  program_ = expr::Program::compile(expr::Expr::parse(source), slots, parameters);
}

std::vector<double> PhaseFunction::gradient(std::span<const double> z) const {
  const auto zs = seed_all<double>(z);
  const D1 v = program_.eval<D1>(zs);
  std::vector<double> g(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) g[i] = v.partial(i);
  return g;
}

double poisson_bracket(const HamiltonianSystem& hs, std::span<const double> z,
                       std::span<const double> grad_f, std::span<const double> grad_g) {
  const auto pi = hs.poisson<double>(z);
  double s = 0.0;
  for (std::size_t a = 0; a < hs.dim(); ++a) {
    for (std::size_t b = 0; b < hs.dim(); ++b) s += grad_f[a] * pi(a, b) * grad_g[b];
  }
  return s;
}

namespace {

struct PhaseJet {
  Mat<double> poisson;
  std::vector<double> drift;
  std::vector<double> dpoisson;  // [(a * N + b) * N + c] = d_c Pi^{ab}
  Mat<double> ddrift;            // (a, c) = d_c drift^a
};

PhaseJet phase_jet(const HamiltonianSystem& hs, std::span<const double> z) {
  const std::size_t N = hs.dim();
  const auto zs = seed_all<double>(z);
  const auto geo = hs.geometry<D1>(std::span<const D1>(zs));
  PhaseJet j{Mat<double>(N, N), std::vector<double>(N), std::vector<double>(N * N * N, 0.0),
             Mat<double>(N, N)};
  for (std::size_t a = 0; a < N; ++a) {
    j.drift[a] = geo.drift[a].value();
    for (std::size_t c = 0; c < N; ++c) j.ddrift(a, c) = geo.drift[a].partial(c);
    for (std::size_t b = 0; b < N; ++b) {
      j.poisson(a, b) = geo.poisson(a, b).value();
      for (std::size_t c = 0; c < N; ++c) j.dpoisson[(a * N + b) * N + c] = geo.poisson(a, b).partial(c);
    }
  }
  return j;
}

}  // namespace

double jacobi_residual(const HamiltonianSystem& hs, std::span<const double> z) {
  const std::size_t N = hs.dim();
  const auto j = phase_jet(hs, z);
  auto dp = [&](std::size_t a, std::size_t b, std::size_t c) { return j.dpoisson[(a * N + b) * N + c]; };
  double worst = 0.0;
  for (std::size_t a = 0; a < N; ++a) {
    for (std::size_t b = a + 1; b < N; ++b) {
      for (std::size_t c = b + 1; c < N; ++c) {
        double s = 0.0;
        for (std::size_t d = 0; d < N; ++d) {
          s += j.poisson(a, d) * dp(b, c, d) + j.poisson(b, d) * dp(c, a, d) +
               j.poisson(c, d) * dp(a, b, d);
        }
        worst = std::max(worst, std::fabs(s));
      }
    }
  }
  return worst;
}

double drift_compatibility(const HamiltonianSystem& hs, std::span<const double> z) {
  const std::size_t N = hs.dim();
  const auto j = phase_jet(hs, z);
  double worst = 0.0;
  for (std::size_t a = 0; a < N; ++a) {
    for (std::size_t b = 0; b < N; ++b) {
      double s = 0.0;
      for (std::size_t c = 0; c < N; ++c) {
        s += j.drift[c] * j.dpoisson[(a * N + b) * N + c] - j.poisson(c, b) * j.ddrift(a, c) -
             j.poisson(a, c) * j.ddrift(b, c);
      }
      worst = std::max(worst, std::fabs(s));
    }
  }
  return worst;
}

double antisymmetry_residual(const HamiltonianSystem& hs, std::span<const double> z) {
  const auto pi = hs.poisson<double>(z);
  double worst = 0.0;
  for (std::size_t a = 0; a < hs.dim(); ++a) {
    for (std::size_t b = 0; b < hs.dim(); ++b) {
      worst = std::max(worst, std::fabs(pi(a, b) + pi(b, a)));
    }
  }
  return worst;
}

DriftCheck check_hamiltonian_drift(const HamiltonianSystem& hs, const PhaseFunction& f,
                                   const std::vector<std::vector<double>>& samples, double tol) {
  DriftCheck out;
  const std::size_t N = hs.dim();
  for (const auto& z : samples) {
    const auto geo = hs.geometry<double>(z);
    const auto g = f.gradient(z);
    const double scale = std::max(1.0, max_abs(geo.drift));
    for (std::size_t a = 0; a < N; ++a) {
      double s = 0.0;
      for (std::size_t b = 0; b < N; ++b) s += geo.poisson(a, b) * g[b];
      out.max_residual = std::max(out.max_residual, std::fabs(s - geo.drift[a]) / scale);
    }
  }
  out.ok = out.max_residual <= tol;
  return out;
}

double canonical_bracket_residual(const HamiltonianSystem& general, std::span<const double> z) {
  if (general.kind() != HamiltonianSystem::Kind::General || !general.closure().pure_gauge()) {
    throw std::invalid_argument("canonical_bracket_residual needs a general pure-gauge system");
  }
  const std::size_t nn = general.n();
  const std::size_t N = general.dim();
  // Jacobian of (x, p) -> (x, pi) with Z^T pi = p.
  const auto zs = seed_all<double>(z);
  std::span<const D1> xs(zs.data(), nn);
  Mat<D1> zt(nn, nn);
  for (std::size_t a = 0; a < nn; ++a) {
    const auto v = general.closure().basis()[a].eval<D1>(xs);
    for (std::size_t i = 0; i < nn; ++i) zt(a, i) = v[i];
  }
  const auto pi = solve_square(zt, std::vector<D1>(zs.begin() + nn, zs.end()));
  Mat<double> jac(N, N);
  for (std::size_t i = 0; i < nn; ++i) jac(i, i) = 1.0;
  for (std::size_t i = 0; i < nn; ++i) {
    for (std::size_t b = 0; b < N; ++b) jac(nn + i, b) = pi[i].partial(b);
  }
  const auto p = general.poisson<double>(z);
  double worst = 0.0;
  for (std::size_t a = 0; a < N; ++a) {
    for (std::size_t b = 0; b < N; ++b) {
      double s = 0.0;
      for (std::size_t c = 0; c < N; ++c) {
        for (std::size_t d = 0; d < N; ++d) s += jac(a, c) * p(c, d) * jac(b, d);
      }
      double want = 0.0;
      if (a < nn && b == nn + a) want = 1.0;
      if (b < nn && a == nn + b) want = -1.0;
      worst = std::max(worst, std::fabs(s - want));
    }
  }
  return worst;
}

}  // namespace partlag
