#include "partlag/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace partlag {

double central_diff(const std::function<double(double)>& f, double t, double d) {
  return (f(t - 2 * d) - 8.0 * f(t - d) + 8.0 * f(t + d) - f(t + 2 * d)) / (12.0 * d);
}

std::vector<double> central_diff(const std::function<std::vector<double>(double)>& f, double t,
                                 double d) {
  const auto m2 = f(t - 2 * d);
  const auto m1 = f(t - d);
  const auto p1 = f(t + d);
  const auto p2 = f(t + 2 * d);
  std::vector<double> out(m2.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * d);
  }
  return out;
}

double central_diff2(const std::function<double(double)>& f, double t, double d) {
  return (-f(t - 2 * d) + 16.0 * f(t - d) - 30.0 * f(t) + 16.0 * f(t + d) - f(t + 2 * d)) /
         (12.0 * d * d);
}

std::vector<double> ResidualSeries::max_by_component() const {
  std::vector<double> out(names.size(), 0.0);
  for (const auto& row : values) {
    for (std::size_t k = 0; k < row.size(); ++k) out[k] = std::max(out[k], std::fabs(row[k]));
  }
  return out;
}

namespace {

double max_abs(const std::vector<double>& v) {
  double r = 0.0;
  for (double x : v) r = std::max(r, std::fabs(x));
  return r;
}

// Controls, momenta and dL/dx rebuilt from x(t) alone.
struct Recon {
  std::vector<double> x;
  std::vector<double> u;
  std::vector<double> p;   // dL/du
  std::vector<double> lx;  // dL/dx at fixed u
  double constraint = 0.0;
};

class Reconstructor {
 public:
  Reconstructor(const HamiltonianSystem& hs, const Trajectory& tr, bool smooth)
      : hs_(hs), tr_(tr), smooth_(smooth) {}

  std::vector<double> x_at(double t) const {
    auto z = smooth_ ? tr_.smooth_state_at(t) : tr_.state_at(t);
    z.resize(hs_.n());
    return z;
  }

  std::vector<double> xdot_at(double t, double d) const {
    if (!smooth_) return central_diff([this](double s) { return x_at(s); }, t, d);
    auto v = tr_.smooth_velocity_at(t);
    v.resize(hs_.n());
    return v;
  }

  Recon at(double t, double d) const {
    const std::size_t n = hs_.n();
    const std::size_t m = hs_.m();
    Recon r;
    r.x = x_at(t);
    const auto xdot = xdot_at(t, d);
    Mat<double> z(n, m);
    for (std::size_t a = 0; a < m; ++a) {
      const auto col = hs_.closure().basis()[a](r.x);
      for (std::size_t i = 0; i < n; ++i) z(i, a) = col[i];
    }
    const auto v = hs_.closure().drift()(r.x);
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = xdot[i] - v[i];
    double res = 0.0;
    r.u = HouseholderQR<double>(z).solve(rhs, &res);
    r.constraint = res / std::max(1.0, max_abs(xdot));

    std::vector<D1> xs, us;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(D1::variable(r.x[i], i, n + m));
    for (std::size_t a = 0; a < m; ++a) us.push_back(D1::variable(r.u[a], n + a, n + m));
    const D1 l = hs_.control().L<D1>(xs, us);
    r.lx.resize(n);
    r.p.resize(m);
    for (std::size_t i = 0; i < n; ++i) r.lx[i] = l.partial(i);
    for (std::size_t a = 0; a < m; ++a) r.p[a] = l.partial(n + a);
    return r;
  }

 private:
  const HamiltonianSystem& hs_;
  const Trajectory& tr_;
  bool smooth_;
};

struct Probe {
  std::vector<double> values;
  std::vector<double> scales;
};

// Sample times whose stencils (depth levels of +-2d) stay inside the run.
template <class F>
ResidualSeries sample(const Trajectory& tr, const ResidualOptions& opts, int depth,
                      std::vector<std::string> names, F&& at) {
  ResidualSeries out;
  out.names = std::move(names);
  std::vector<double> ts;
  for (std::size_t i = 0; i < tr.size(); i += std::max<std::size_t>(1, opts.stride)) {
    ts.push_back(tr.times()[i]);
  }
  for (std::size_t k = 1; k < opts.grid_points; ++k) {
    ts.push_back(tr.t_begin() + (tr.t_end() - tr.t_begin()) * static_cast<double>(k) /
                                    static_cast<double>(opts.grid_points));
  }
  std::sort(ts.begin(), ts.end());
  for (const double t : ts) {
    const double d = std::clamp(opts.fd_factor * tr.step_at(t), opts.fd_min, opts.fd_max);
    const double reach = 2.0 * d * depth;
    if (t - reach < tr.t_begin() || t + reach > tr.t_end()) continue;
    auto row = at(t, d);
    for (double v : row) out.max_abs = std::max(out.max_abs, std::fabs(v));
    out.t.push_back(t);
    out.values.push_back(std::move(row));
  }
  if (out.t.empty()) {
    throw InsufficientSamples("trajectory too short for finite-difference residuals");
  }
  return out;
}

}  // namespace

ResidualSeries conditional_residual(const HamiltonianSystem& hs, const Trajectory& traj,
                                    const ResidualOptions& opts) {
  if (hs.kind() != HamiltonianSystem::Kind::General) {
    throw std::invalid_argument("conditional_residual expects general phase coordinates");
  }
  if (traj.dim() != hs.dim()) throw std::invalid_argument("trajectory dimension mismatch");
  const ClosureResult& cl = hs.closure();
  const std::size_t n = hs.n();
  const std::size_t m = hs.m();
  const std::size_t mb = hs.m_bar();
  const bool integrable = mb == m;
  if (!integrable && !(cl.one_step_pattern() && mb == 2 * m)) {
    throw std::invalid_argument(
        "conditional residual is implemented for integrable and one-step closures only");
  }
  Reconstructor rec(hs, traj, opts.smooth);

  std::vector<std::string> names;
  for (std::size_t a = 0; a < m; ++a) names.push_back("eq" + std::to_string(a + 1));
  for (std::size_t a = 0; a < mb; ++a) names.push_back("mom" + std::to_string(a + 1));
  names.push_back("con");

  auto scaled = [](double v, double s) { return v / std::max(1.0, s); };

  if (integrable) {
    return sample(traj, opts, 2, names, [&](double t, double d) {
      const Recon r = rec.at(t, d);
      const auto pdot = central_diff([&](double s) { return rec.at(s, d).p; }, t, d);
      const auto sf = cl.structure_functions_at<double>(std::span<const double>(r.x));
      const auto z = traj.state_at(t);
      std::vector<double> row;
      for (std::size_t a = 0; a < m; ++a) {
        double lz = 0.0;
        for (std::size_t i = 0; i < n; ++i) lz += r.lx[i] * sf.basis(i, a);
        double drift = 0.0;
        for (std::size_t b = 0; b < m; ++b) {
          double k = sf.drift(b, a);
          for (std::size_t c = 0; c < m; ++c) k += sf.U(b, a, c) * r.u[c];
          drift += r.p[b] * k;
        }
        const double scale = std::max({std::fabs(lz), std::fabs(pdot[a]), std::fabs(drift)});
        const double v = lz - pdot[a] - drift;
        row.push_back(opts.normalize ? scaled(v, scale) : v);
      }
      for (std::size_t a = 0; a < m; ++a) {
        const double v = z[n + a] - r.p[a];
        row.push_back(opts.normalize ? scaled(v, std::fabs(r.p[a])) : v);
      }
      row.push_back(r.constraint);
      return row;
    });
  }

  // One-step closure: q_a = {p_a, H} - pdot_a - D^b_a p_b (b original)
  // stands for the extension momentum; the equation part is the extension
  // momentum's Hamiltonian equation with q substituted.
  auto bracket_p0_h = [&](const Recon& r, const StructureFunctions<double>& sf, std::size_t a) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += sf.basis(i, a) * r.lx[i];
    for (std::size_t c = 0; c < m; ++c) {
      for (std::size_t b = 0; b < m; ++b) s -= sf.U(c, a, b) * r.p[c] * r.u[b];
    }
    return s;
  };
  // Index of the extension field built from generator a.
  std::vector<std::size_t> ext(m);
  for (std::size_t k = m; k < mb; ++k) ext[cl.basis()[k].left()] = k;

  auto q_at = [&](double s, double d) {
    const Recon r = rec.at(s, d);
    const auto pdot = central_diff([&](double w) { return rec.at(w, d).p; }, s, d);
    const auto sf = cl.structure_functions_at<double>(std::span<const double>(r.x));
    std::vector<double> q(m);
    for (std::size_t a = 0; a < m; ++a) {
      double v = bracket_p0_h(r, sf, a) - pdot[a];
      for (std::size_t b = 0; b < m; ++b) v -= sf.drift(b, a) * r.p[b];
      q[a] = v;
    }
    return q;
  };

  return sample(traj, opts, 3, names, [&](double t, double d) {
    const Recon r = rec.at(t, d);
    const auto q = q_at(t, d);
    const auto qdot = central_diff([&](double s) { return q_at(s, d); }, t, d);
    const auto sf = cl.structure_functions_at<double>(std::span<const double>(r.x));
    // Full momentum vector in basis order.
    std::vector<double> pfull(mb, 0.0);
    for (std::size_t a = 0; a < m; ++a) {
      pfull[a] = r.p[a];
      pfull[ext[a]] = q[a];
    }
    const auto z = traj.state_at(t);
    std::vector<double> row;
    for (std::size_t a = 0; a < m; ++a) {
      const std::size_t e = ext[a];
      double zl = 0.0;
      for (std::size_t i = 0; i < n; ++i) zl += sf.basis(i, e) * r.lx[i];
      double up = 0.0;
      for (std::size_t c = 0; c < mb; ++c) {
        for (std::size_t b = 0; b < m; ++b) up += sf.U(c, e, b) * pfull[c] * r.u[b];
      }
      double dp = 0.0;
      for (std::size_t b = 0; b < mb; ++b) dp += sf.drift(b, e) * pfull[b];
      const double v = qdot[a] - (zl - up - dp);
      const double scale = std::max({std::fabs(qdot[a]), std::fabs(zl), std::fabs(up), std::fabs(dp)});
      row.push_back(opts.normalize ? scaled(v, scale) : v);
    }
    for (std::size_t b = 0; b < mb; ++b) {
      const double v = z[n + b] - pfull[b];
      row.push_back(opts.normalize ? scaled(v, std::fabs(pfull[b])) : v);
    }
    row.push_back(r.constraint);
    return row;
  });
}

ResidualSeries conditional_residual(const ControlSystem& sys, const ClosureResult& closure,
                                    const Trajectory& traj, const ResidualOptions& opts) {
  return conditional_residual(HamiltonianSystem::build(sys, closure), traj, opts);
}

ResidualSeries euler_lagrange_residual(const HamiltonianSystem& hs, const Trajectory& traj,
                                       const ResidualOptions& opts) {
  const std::size_t n = hs.n();
  if (hs.m() != n) {
    throw std::invalid_argument("Euler-Lagrange residual needs one control per state (m = n)");
  }
  const auto& basis = hs.closure().basis();
  const auto& drift = hs.closure().drift();
  Reconstructor rec(hs, traj, opts.smooth);

  // (dLag/dx, dLag/dv) at (x(t), xdot(t)).
  auto grads = [&](double t, double d) {
    const auto x = rec.x_at(t);
    const auto xdot = rec.xdot_at(t, d);
    std::vector<D1> xs, vs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(D1::variable(x[i], i, 2 * n));
    for (std::size_t i = 0; i < n; ++i) vs.push_back(D1::variable(xdot[i], n + i, 2 * n));
    Mat<D1> z(n, n);
    for (std::size_t a = 0; a < n; ++a) {
      const auto col = basis[a].eval<D1>(std::span<const D1>(xs));
      for (std::size_t i = 0; i < n; ++i) z(i, a) = col[i];
    }
    const auto v = drift.eval<D1>(std::span<const D1>(xs));
    std::vector<D1> rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = vs[i] - v[i];
    const auto u = solve_square(z, rhs);
    const D1 l = hs.control().L<D1>(std::span<const D1>(xs), std::span<const D1>(u));
    std::vector<double> g(2 * n);
    for (std::size_t k = 0; k < 2 * n; ++k) g[k] = l.partial(k);
    return g;
  };

  std::vector<std::string> names;
  for (std::size_t a = 0; a < n; ++a) names.push_back("el" + std::to_string(a + 1));
  return sample(traj, opts, 2, names, [&](double t, double d) {
    const auto g = grads(t, d);
    const auto pv = central_diff(
        [&](double s) {
          auto gs = grads(s, d);
          return std::vector<double>(gs.begin() + static_cast<std::ptrdiff_t>(n), gs.end());
        },
        t, d);
    const auto x = rec.x_at(t);
    std::vector<double> row;
    for (std::size_t a = 0; a < n; ++a) {
      const auto col = basis[a](x);
      double v = 0.0;
      double scale = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        v += col[i] * (g[i] - pv[i]);
        scale = std::max({scale, std::fabs(col[i] * g[i]), std::fabs(col[i] * pv[i])});
      }
      row.push_back(opts.normalize ? v / std::max(1.0, scale) : v);
    }
    return row;
  });
}

}  // namespace partlag
