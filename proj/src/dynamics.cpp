#include "partlag/dynamics.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace partlag {

namespace {

// Dormand-Prince 5(4), Hairer's dopri5 tableau and contd5 dense output.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double rms_norm(const std::vector<double>& v, const std::vector<double>& sk) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += (v[i] / sk[i]) * (v[i] / sk[i]);
  return std::sqrt(s / static_cast<double>(v.size()));
}

double max_norm(const std::vector<double>& v, const std::vector<double>& sk) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s = std::max(s, std::fabs(v[i] / sk[i]));
  return s;
}

}  // namespace

const char* IntegrationError::kind_name() const noexcept {
  switch (kind_) {
    case Kind::StepUnderflow: return "step_underflow";
    case Kind::NonFinite: return "non_finite";
    case Kind::TooManySteps: return "too_many_steps";
  }
  return "unknown";
}

std::vector<double> Trajectory::Segment::eval(double t) const {
  const double s = (t - t0) / h;
  const double s1 = 1.0 - s;
  std::vector<double> y(r[0].size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
  }
  return y;
}

double Trajectory::Segment::eval(double t, std::size_t i) const {
  const double s = (t - t0) / h;
  const double s1 = 1.0 - s;
  return r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
}

std::size_t Trajectory::segment_index(double t) const {
  if (segments_.empty()) throw std::logic_error("trajectory has no steps");
  const double span = t_.back() - t_.front();
  const double slack = 1e-12 * std::max(1.0, std::fabs(span));
  if (t < t_.front() - slack || t > t_.back() + slack) {
    throw std::out_of_range("time " + std::to_string(t) + " outside trajectory [" +
                            std::to_string(t_.front()) + ", " + std::to_string(t_.back()) + "]");
  }
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  std::size_t k = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
  return std::min(k, segments_.size() - 1);
}

std::vector<double> Trajectory::state_at(double t) const {
  return segments_[segment_index(t)].eval(t);
}

double Trajectory::component_at(double t, std::size_t i) const {
  return segments_[segment_index(t)].eval(t, i);
}

double Trajectory::step_at(double t) const { return segments_[segment_index(t)].h; }

std::vector<double> Trajectory::smooth_state_at(double t) const { return hermite(t, false); }

std::vector<double> Trajectory::smooth_velocity_at(double t) const { return hermite(t, true); }

std::vector<double> Trajectory::hermite(double t, bool derivative) const {
  // Usable nodes: all samples, except the one before a final step that an
  // event cut much shorter than its predecessor (near-coincident nodes make
  // the divided differences noisy).
  const std::size_t N = t_.size();
  const bool skip = N >= 6 && t_[N - 1] - t_[N - 2] < 0.25 * (t_[N - 2] - t_[N - 3]);
  const std::size_t count = skip ? N - 1 : N;
  auto node = [&](std::size_t j) { return skip && j >= N - 2 ? j + 1 : j; };
  const std::size_t nodes = std::min<std::size_t>(4, count);
  // Window of `nodes` samples around t, shifted inside the run.
  std::size_t k = segment_index(t);
  if (skip && k >= N - 2) k = N - 3;
  std::size_t lo = k > 0 ? k - 1 : 0;
  if (lo + nodes > count) lo = count - nodes;
  const std::size_t q = 2 * nodes;
  std::vector<double> z(q);
  for (std::size_t j = 0; j < nodes; ++j) z[2 * j] = z[2 * j + 1] = t_[node(lo + j)];
  const std::size_t n = dim();
  std::vector<double> out(n);
  std::vector<double> c(q);
  for (std::size_t i = 0; i < n; ++i) {
    // Newton divided differences with doubled nodes.
    for (std::size_t j = 0; j < q; ++j) c[j] = y_[node(lo + j / 2)][i];
    for (std::size_t level = 1; level < q; ++level) {
      for (std::size_t j = q - 1; j >= level; --j) {
        const double dz = z[j] - z[j - level];
        if (dz == 0.0) {
          c[j] = dy_[node(lo + j / 2)][i];  // level 1 on a doubled node
        } else {
          c[j] = (c[j] - c[j - 1]) / dz;
        }
      }
    }
    double v = c[q - 1];
    double dv = 0.0;
    for (std::size_t j = q - 1; j-- > 0;) {
      dv = dv * (t - z[j]) + v;
      v = v * (t - z[j]) + c[j];
    }
    out[i] = derivative ? dv : v;
  }
  return out;
}

const std::vector<double>& Trajectory::ledger(const std::string& name) const {
  for (std::size_t k = 0; k < ledger_names_.size(); ++k) {
    if (ledger_names_[k] == name) return ledger_[k];
  }
  throw std::out_of_range("no ledger column '" + name + "'");
}

Trajectory Trajectory::perturbed(std::size_t component, double factor) const {
  if (component >= dim()) throw std::out_of_range("perturbed: component out of range");
  Trajectory out = *this;
  for (auto& y : out.y_) y[component] *= factor;
  for (auto& y : out.dy_) y[component] *= factor;
  for (auto& s : out.segments_) {
    for (auto& r : s.r) r[component] *= factor;
  }
  for (auto& e : out.events_) e.y[component] *= factor;
  out.ledger_names_.clear();
  out.ledger_.clear();
  return out;
}

void Trajectory::set_ledger(const std::vector<Observable>& observables) {
  ledger_names_.clear();
  ledger_.clear();
  for (const auto& o : observables) {
    ledger_names_.push_back(o.name);
    std::vector<double> col;
    col.reserve(y_.size());
    for (const auto& y : y_) col.push_back(o.f(y));
    ledger_.push_back(std::move(col));
  }
}

Trajectory integrate_ode(const OdeRhs& f, std::vector<double> y0, double t0, double t1,
                         const OdeOptions& opts, const std::vector<EventSpec>& events,
                         const std::vector<Observable>& ledger) {
  if (!(t1 > t0)) throw std::invalid_argument("integration interval must have t1 > t0");
  if (!all_finite(y0)) throw IntegrationError(IntegrationError::Kind::NonFinite, t0, y0, "non-finite initial state");
  if (opts.fixed_step && !(opts.h_initial > 0.0)) {
    throw std::invalid_argument("fixed_step needs a positive h_initial");
  }
  const std::size_t n = y0.size();
  Trajectory tr;
  tr.t_.push_back(t0);
  tr.y_.push_back(y0);

  auto eval = [&](double t, const std::vector<double>& y) {
    ++tr.nfev_;
    return f(t, y);
  };

  double t = t0;
  std::vector<double> y = std::move(y0);
  std::vector<double> k1 = eval(t, y);
  if (!all_finite(k1)) throw IntegrationError(IntegrationError::Kind::NonFinite, t, y, "non-finite derivative at the initial state");
  tr.dy_.push_back(k1);

  auto scale = [&](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> sk(n);
    for (std::size_t i = 0; i < n; ++i) {
      sk[i] = opts.atol + opts.rtol * std::max(std::fabs(a[i]), std::fabs(b[i]));
    }
    return sk;
  };

  double h = opts.h_initial;
  if (!(h > 0.0)) {
    // Hairer's starting-step heuristic.
    const auto sk = scale(y, y);
    const double dnf = rms_norm(k1, sk);
    const double dny = rms_norm(y, sk);
    double h0 = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
    h0 = std::min(h0, t1 - t0);
    std::vector<double> y1(n);
    for (std::size_t i = 0; i < n; ++i) y1[i] = y[i] + h0 * k1[i];
    const auto k2 = eval(t + h0, y1);
    std::vector<double> dk(n);
    for (std::size_t i = 0; i < n; ++i) dk[i] = (k2[i] - k1[i]) / h0;
    const double der2 = rms_norm(dk, sk);
    const double der12 = std::max(std::fabs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / der12, 0.2);
    h = std::min(100.0 * h0, h1);
  }
  if (opts.h_max > 0.0) h = std::min(h, opts.h_max);

  std::vector<double> gprev(events.size());
  for (std::size_t e = 0; e < events.size(); ++e) gprev[e] = events[e].g(t, y);

  auto push_ledger = [&](const std::vector<double>& yy) {
    for (std::size_t k = 0; k < ledger.size(); ++k) tr.ledger_[k].push_back(ledger[k].f(yy));
  };
  for (const auto& o : ledger) tr.ledger_names_.push_back(o.name);
  tr.ledger_.assign(ledger.size(), {});
  push_ledger(y);

  constexpr double safe = 0.9, facc1 = 5.0, facc2 = 0.1, beta = 0.04;
  constexpr double expo1 = 0.2 - beta * 0.75;
  double facold = 1e-4;
  bool last_rejected = false;
  std::size_t steps = 0;
  std::vector<double> yt(n), y1(n), k2, k3, k4, k5, k6, k7;

  while (t < t1) {
    if (++steps > opts.max_steps) {
      throw IntegrationError(IntegrationError::Kind::TooManySteps, t, y, "step limit reached");
    }
    if (h < opts.h_min * std::max(1.0, std::fabs(t))) {
      throw IntegrationError(IntegrationError::Kind::StepUnderflow, t, y,
                             "step size underflow at t = " + std::to_string(t));
    }
    bool final_step = false;
    if (t + 1.01 * h >= t1) {
      h = t1 - t;
      final_step = true;
    }

    bool stage_ok = true;
    try {
      for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + h * a21 * k1[i];
      k2 = eval(t + c2 * h, yt);
      for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      k3 = eval(t + c3 * h, yt);
      for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      k4 = eval(t + c4 * h, yt);
      for (std::size_t i = 0; i < n; ++i) {
        yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      }
      k5 = eval(t + c5 * h, yt);
      for (std::size_t i = 0; i < n; ++i) {
        yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      }
      k6 = eval(t + h, yt);
      for (std::size_t i = 0; i < n; ++i) {
        y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
      }
      k7 = eval(t + h, y1);
      stage_ok = all_finite(y1) && all_finite(k7);
    } catch (const DomainError&) {
      stage_ok = false;
    }

    double err = 0.0;
    if (stage_ok && !opts.fixed_step) {
      const auto sk = scale(y, y1);
      std::vector<double> ev(n);
      for (std::size_t i = 0; i < n; ++i) {
        ev[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      }
      err = max_norm(ev, sk);
      stage_ok = std::isfinite(err);
    }
    if (!stage_ok) {
      if (opts.fixed_step) {
        throw IntegrationError(IntegrationError::Kind::NonFinite, t, y,
                               "non-finite state in fixed step at t = " + std::to_string(t));
      }
      h *= 0.25;
      last_rejected = true;
      ++tr.rejected_;
      continue;
    }

    const double fac11 = std::pow(std::max(err, 1e-300), expo1);
    if (opts.fixed_step || err <= 1.0) {
      // Dense output for [t, t + h].
      Trajectory::Segment seg;
      seg.t0 = t;
      seg.h = h;
      for (auto& r : seg.r) r.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double ydiff = y1[i] - y[i];
        const double bspl = h * k1[i] - ydiff;
        seg.r[0][i] = y[i];
        seg.r[1][i] = ydiff;
        seg.r[2][i] = bspl;
        seg.r[3][i] = ydiff - h * k7[i] - bspl;
        seg.r[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }

      // Crossings inside this step, in time order; the first terminal one ends
      // the run.
      std::vector<std::pair<double, std::size_t>> hits;
      std::vector<double> gnew(events.size());
      for (std::size_t e = 0; e < events.size(); ++e) {
        gnew[e] = events[e].g(t + h, y1);
        const double ga = gprev[e];
        const double gb = gnew[e];
        const bool falling = ga > 0.0 && gb <= 0.0;
        const bool rising = ga < 0.0 && gb >= 0.0;
        const int dir = events[e].direction;
        if (!((falling && dir <= 0) || (rising && dir >= 0))) continue;
        double root = t + h;
        if (gb != 0.0) {
          auto g = [&](double s) { return events[e].g(s, seg.eval(s)); };
          std::uintmax_t iters = 200;
          const double tol = opts.event_tol;
          auto done = [tol](double a, double b) { return std::fabs(b - a) <= tol; };
          const auto br = boost::math::tools::toms748_solve(g, t, t + h, ga, gb, done, iters);
          root = 0.5 * (br.first + br.second);
        }
        hits.emplace_back(root, e);
      }
      std::sort(hits.begin(), hits.end());

      tr.segments_.push_back(std::move(seg));
      tr.h_.push_back(h);
      tr.err_.push_back(err);

      for (const auto& [th, e] : hits) {
        auto ye = tr.segments_.back().eval(th);
        tr.events_.push_back({events[e].name, th, ye});
        if (events[e].terminal) {
          tr.t_.push_back(th);
          tr.y_.push_back(ye);
          tr.dy_.push_back(f(th, ye));
          push_ledger(ye);
          tr.termination_ = Trajectory::Termination::Event;
          return tr;
        }
      }

      t = final_step ? t1 : t + h;
      y = y1;
      k1 = k7;
      gprev = gnew;
      tr.t_.push_back(t);
      tr.y_.push_back(y);
      tr.dy_.push_back(k1);
      push_ledger(y);

      if (opts.fixed_step) {
        h = opts.h_initial;
        continue;
      }
      double fac = fac11 / std::pow(facold, beta);
      fac = std::max(facc2, std::min(facc1, fac / safe));
      double hnew = h / fac;
      facold = std::max(err, 1e-4);
      if (last_rejected) hnew = std::min(hnew, h);
      if (opts.h_max > 0.0) hnew = std::min(hnew, opts.h_max);
      last_rejected = false;
      h = hnew;
    } else {
      h /= std::min(facc1, fac11 / safe);
      last_rejected = true;
      ++tr.rejected_;
    }
  }
  return tr;
}

Trajectory integrate(const HamiltonianSystem& hs, std::vector<double> z0, double t0, double t1,
                     const OdeOptions& opts, const std::vector<EventSpec>& events,
                     const std::vector<Observable>& ledger) {
  if (z0.size() != hs.dim()) {
    throw std::invalid_argument("initial state has dimension " + std::to_string(z0.size()) +
                                ", expected " + std::to_string(hs.dim()));
  }
  auto f = [&hs](double, std::span<const double> z) {
    try {
      return hs.rhs(z);
    } catch (const LegendreError& e) {
      throw DomainError("legendre", std::numeric_limits<double>::quiet_NaN(), e.what());
    } catch (const RankDeficient& e) {
      throw DomainError("basis", std::numeric_limits<double>::quiet_NaN(), e.what());
    } catch (const DegenerateBasis& e) {
      throw DomainError("basis", std::numeric_limits<double>::quiet_NaN(), e.what());
    }
  };
  return integrate_ode(f, std::move(z0), t0, t1, opts, events, ledger);
}

Observable observable(const PhaseFunction& f) {
  return {f.name(), [f](std::span<const double> z) { return f(z); }};
}

}  // namespace partlag
