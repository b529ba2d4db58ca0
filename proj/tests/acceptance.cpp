// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "partlag/central_field.hpp"
#include "partlag/dofcount.hpp"
#include "partlag/hamiltonize.hpp"
#include "partlag/parallel.hpp"
#include "partlag/toy_models.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace partlag;

namespace {

// Pinned tolerances.
constexpr double kBracketTol = 1e-12;
constexpr double kIdentityTol = 1e-8;
constexpr double kConservationTol = 1e-8;
constexpr double kOracleTol = 1e-6;
constexpr double kApsidalTol = 1e-5;
constexpr double kKeplerTol = 1e-7;
constexpr double kSpiralTol = 1e-5;
constexpr double kResidualTol = 1e-6;
constexpr double kPerturbedFloor = 1e-3;
constexpr double kMultiplierKTol = 1e-8;
constexpr double kCanonicalTol = 1e-10;

constexpr double kRtol = 1e-10;
constexpr double kAtol = 1e-12;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double budget_s;  // 0: no runtime bound
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

OdeOptions tight() {
  OdeOptions o;
  o.rtol = kRtol;
  o.atol = kAtol;
  return o;
}

const central::Params& kepler() {
  static const central::Params p;
  return p;
}

const HamiltonianSystem& central_hs() {
  static const HamiltonianSystem hs = central::hamiltonian_system(kepler());
  return hs;
}

// Trajectories produced by criteria 4 to 7, re-checked by criterion 8.
struct Run {
  std::string label;
  Trajectory traj;
  double E;
};
std::vector<Run>& runs() {
  static std::vector<Run> r;
  return r;
}

double max_rel_drift(const Trajectory& tr) {
  double w = 0.0;
  for (const auto& col : tr.ledger()) {
    for (double v : col) w = std::max(w, std::fabs(v - col[0]) / std::max(1.0, std::fabs(col[0])));
  }
  return w;
}

// Worst |r - oracle(phi)| / r over the accepted samples with r above r_floor.
double oracle_error(const central::OrbitClass& cls, const Trajectory& tr, double r_floor = 0.0) {
  double w = 0.0;
  for (const auto& y : tr.states()) {
    if (y[0] < r_floor) continue;
    w = std::max(w, std::fabs(y[0] - central::oracle_r_of_phi(cls, y[1])) / y[0]);
  }
  return w;
}

Outcome dof_fixture() {
  const std::pair<const char*, long> want[] = {
      {"cotton", 6}, {"einstein-linear", 4}, {"central-field", 5}, {"central-field-multiplier", 6}};
  Outcome out;
  for (const auto& [name, n] : want) {
    const long got = dof::dof(dof::builtin(name));
    out.pass = out.pass && got == n;
    out.detail += std::string(name) + "=" + std::to_string(got) + " ";
  }
  return out;
}

Outcome brackets() {
  const auto& hs = central_hs();
  const double m = kepler().m;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> R(0.5, 3.0), U(-2.0, 2.0);
  double w = 0.0;
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> z{R(rng), U(rng), U(rng), U(rng), U(rng)};
    const double r = z[0], M = z[2], p1 = z[4];
    const auto pi = hs.poisson<double>(z);
    w = std::max({w, std::fabs(pi(0, 3) - 1.0), std::fabs(pi(1, 4) + 2 * M / (m * r * r * r)),
                  std::fabs(pi(3, 4) - 3 * p1 / r)});
  }
  return {w <= kBracketTol, "max error " + fmt("%.3g", w)};
}

std::vector<std::vector<double>> phase_points(const HamiltonianSystem& hs,
                                              const std::vector<std::vector<double>>& xs,
                                              std::mt19937_64& rng) {
  std::uniform_real_distribution<double> P(-1.5, 1.5);
  std::vector<std::vector<double>> out;
  for (int i = 0; i < 50; ++i) {
    auto z = xs[static_cast<std::size_t>(i) % xs.size()];
    for (std::size_t k = 0; k < hs.m_bar(); ++k) z.push_back(P(rng));
    out.push_back(std::move(z));
  }
  return out;
}

Outcome identity_suite() {
  Outcome out;
  std::mt19937_64 rng(3);
  for (const char* name : {"central-field", "rotation-drift", "planar-free"}) {
    const auto& e = toy::lookup(name);
    const auto sys = e.make(e.defaults);
    const auto hs = HamiltonianSystem::build(sys, close_distribution(sys, e.samples));
    // Points off the closure samples: jitter each sample.
    std::vector<std::vector<double>> xs;
    std::uniform_real_distribution<double> J(0.9, 1.1);
    for (int i = 0; i < 50; ++i) {
      auto x = e.samples[static_cast<std::size_t>(i) % e.samples.size()];
      for (auto& v : x) v *= J(rng);
      xs.push_back(std::move(x));
    }
    double jac = 0.0, drift = 0.0;
    for (const auto& item : par::identity_suite(hs, phase_points(hs, xs, rng))) {
      if (!item.error.empty()) return {false, std::string(name) + ": " + item.error};
      jac = std::max(jac, item.jacobi);
      drift = std::max(drift, item.drift);
    }
    out.pass = out.pass && jac <= kIdentityTol && drift <= kIdentityTol;
    out.detail += std::string(name) + " jacobi " + fmt("%.2g", jac) + " drift " + fmt("%.2g", drift) + "; ";
  }
  return out;
}

Outcome conservation() {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<std::vector<double>> z0;
  for (int i = 0; i < 10; ++i) {
    const double r = 0.8 + 0.5 * U(rng), rd = -0.2 + 0.4 * U(rng), M = 0.9 + 0.2 * U(rng),
                 K = -0.05 + 0.11 * U(rng);
    z0.push_back(central::initial_state(r, rd, 0.0, M, K, kepler()));
  }
  const auto items = par::integrate_batch(central_hs(), z0, 0.0, 100.0, tight(), {},
                                          central::invariant_observables(kepler()));
  double w = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!items[i].trajectory) return {false, "state " + std::to_string(i) + ": " + items[i].error};
    const auto& tr = *items[i].trajectory;
    w = std::max(w, max_rel_drift(tr));
    runs().push_back({"random " + std::to_string(i), tr, central::invariants(z0[i], kepler()).E});
  }
  return {w <= kConservationTol, "max relative drift " + fmt("%.3g", w)};
}

Outcome oracle() {
  const std::pair<double, double> shapes[] = {
      {8.0 / 7.0, 0.7}, {1.05, 0.3}, {1.3, 0.5}, {1.6, 0.2}, {1.2, 0.85}};
  const double M = 1.0;
  double w = 0.0, aps = 0.0;
  std::size_t fewest = 1000;
  for (const auto& [gamma, e] : shapes) {
    const auto c = central::constants_from_shape(central::OrbitTag::PrecessingConic, gamma, e, M, kepler());
    auto cls = central::classify(kepler(), M, c.E, c.K);
    if (cls.tag != central::OrbitTag::PrecessingConic) return {false, "shape not classified as conic"};
    // Start at aphelion, integrate a little over 3 radial periods.
    const double r0 = cls.p_latus / (1 - e);
    const double a = -kepler().alpha / (2 * c.E);
    const double period = 2 * std::numbers::pi * std::sqrt(kepler().m * a * a * a / kepler().alpha);
    const auto z0 = central::initial_state(r0, 0.0, 0.0, M, c.K, kepler());
    auto tr = integrate(central_hs(), z0, 0.0, 3.3 * period, tight(), {central::perihelion_event()},
                        central::invariant_observables(kepler()));
    cls = central::fit_phase(cls, 0.0, r0, 0.0);
    w = std::max(w, oracle_error(cls, tr));
    const auto peri = central::perihelion_angles(tr);
    fewest = std::min(fewest, peri.size());
    for (std::size_t i = 1; i < peri.size(); ++i) {
      const double want = 2 * std::numbers::pi * gamma;
      aps = std::max(aps, std::fabs(peri[i] - peri[i - 1] - want) / want);
    }
    runs().push_back({"conic " + fmt("%.4g", gamma), std::move(tr), c.E});
  }
  const bool pass = w <= kOracleTol && aps <= kApsidalTol && fewest >= 3;
  return {pass, "max r error " + fmt("%.3g", w) + ", apsidal " + fmt("%.3g", aps) + ", perihelia >= " +
                    std::to_string(fewest)};
}

Outcome kepler_degenerate() {
  const double r0 = 1.2, rd = 0.25, M = 0.95;
  const auto z0 = central::initial_state(r0, rd, 0.0, M, 0.0, kepler());
  auto cls = central::classify(kepler(), central::invariants(z0, kepler()));
  if (cls.tag != central::OrbitTag::PrecessingConic || cls.gamma != 1.0) {
    return {false, "K = 0 not classified as an ordinary conic"};
  }
  // Ordinary conic: latus rectum M^2/(m alpha).
  const double p_std = M * M / (kepler().m * kepler().alpha);
  cls = central::fit_phase(cls, 0.0, r0, rd);
  auto tr = integrate(central_hs(), z0, 0.0, 40.0, tight());
  const double w = oracle_error(cls, tr);
  const double dp = std::fabs(cls.p_latus - p_std);
  runs().push_back({"kepler", std::move(tr), central::invariants(z0, kepler()).E});
  return {w <= kKeplerTol && dp <= 1e-14, "max r error " + fmt("%.3g", w) + ", e " + fmt("%.6g", cls.e)};
}

Outcome spiral_fall() {
  const double M = 1.0, r_min = 1e-3;
  const auto c = central::constants_from_shape(central::OrbitTag::BoundedFallSpiral, 3.0, 1.5, M, kepler());
  auto cls = central::classify(kepler(), M, c.E, c.K);
  if (cls.tag != central::OrbitTag::BoundedFallSpiral) return {false, "shape not classified as fall"};
  // Outermost point of the spiral.
  const double r0 = cls.p_latus / (cls.e - 1);
  const auto z0 = central::initial_state(r0, 0.0, 0.0, M, c.K, kepler());
  auto tr = integrate(central_hs(), z0, 0.0, 100.0, tight(), {central::fall_event(r_min)});
  if (tr.termination() != Trajectory::Termination::Event) return {false, "r_min event not reached"};
  cls = central::fit_phase(cls, 0.0, r0, 0.0);
  const double w = oracle_error(cls, tr, 10 * r_min);
  const double t_fall = tr.events().front().t;
  runs().push_back({"spiral", std::move(tr), c.E});
  return {w <= kSpiralTol, "fall at t=" + fmt("%.8g", t_fall) + ", max r error " + fmt("%.3g", w)};
}

Outcome residuals() {
  if (runs().empty()) return {false, "no trajectories from criteria 4-7"};
  std::vector<const Trajectory*> all;
  std::vector<Trajectory> kicked;
  for (const auto& r : runs()) {
    all.push_back(&r.traj);
    kicked.push_back(r.traj.perturbed(4, 1.1));
  }
  std::vector<const Trajectory*> bad;
  for (const auto& k : kicked) bad.push_back(&k);
  const auto good = par::residual_batch(central_hs(), all);
  const auto worse = par::residual_batch(central_hs(), bad);
  double cond = 0.0, third = 0.0, floor = 1e300;
  std::string worst;
  for (std::size_t i = 0; i < runs().size(); ++i) {
    const double t3 = central::third_order_residual(kepler(), runs()[i].traj, runs()[i].E).max_abs;
    if (std::max(good[i], t3) > std::max(cond, third)) worst = runs()[i].label;
    cond = std::max(cond, good[i]);
    third = std::max(third, t3);
    floor = std::min(floor, worse[i]);
  }
  const bool pass = cond < kResidualTol && third < kResidualTol && floor > kPerturbedFloor;
  return {pass, std::to_string(runs().size()) + " runs, conditional " + fmt("%.3g", cond) + ", third-order " +
                    fmt("%.3g", third) + " (worst " + worst + "), perturbed min " + fmt("%.3g", floor)};
}

Outcome multiplier() {
  const auto& P = kepler();
  const double r0 = 1.0, rd = 0.1, M = 1.5, t1 = 20.0;
  OdeOptions o;
  o.rtol = 1e-11;
  o.atol = 1e-13;
  double dk = 0.0, res = 0.0;
  for (double c : {0.0, 0.1, 0.5}) {
    const double K = c * M / (4 * P.m);
    const auto tm = integrate_ode(central::multiplier_rhs(P),
                                  central::multiplier_initial_state(r0, rd, 0.0, M, c, P), 0.0, t1, o);
    for (const auto& y : tm.states()) dk = std::max(dk, std::fabs(central::multiplier_K(P, y) - K));
    res = std::max(res, central::third_order_residual(P, tm, central::energy(r0, rd, M, K, P)).max_abs);
  }
  std::vector<double> e;
  for (double l : {10.0, 100.0, 1000.0}) e.push_back(central::multiplier_energy(P, r0, rd, M / (r0 * r0), l));
  const bool falling = e[0] > e[1] && e[1] > e[2] && e[2] < -1e3;
  return {dk <= kMultiplierKTol && res < kResidualTol && falling,
          "max |K - cM/4m| " + fmt("%.3g", dk) + ", third-order " + fmt("%.3g", res) + ", E_lambda " +
              fmt("%.6g", e[0]) + " " + fmt("%.6g", e[1]) + " " + fmt("%.6g", e[2])};
}

Outcome pure_gauge() {
  const auto& e = toy::lookup("planar-free");
  const auto sys = e.make(e.defaults);
  const auto hs = HamiltonianSystem::build(sys, close_distribution(sys, e.samples));
  if (!hs.closure().pure_gauge()) return {false, "planar-free is not pure gauge"};
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  double br = 0.0;
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> z{U(rng), U(rng), U(rng), U(rng)};
    br = std::max(br, canonical_bracket_residual(hs, z));
  }
  const auto tr = integrate(hs, {0.7, -0.3, 0.2, 0.4}, 0.0, 10.0, tight());
  const auto a = conditional_residual(hs, tr);
  const auto b = euler_lagrange_residual(hs, tr);
  double diff = a.t == b.t ? 0.0 : 1e300;
  for (std::size_t i = 0; i < a.t.size() && diff < 1e300; ++i) {
    for (std::size_t k = 0; k < b.values[i].size(); ++k) {
      diff = std::max(diff, std::fabs(a.values[i][k] - b.values[i][k]));
    }
  }
  return {br <= kCanonicalTol && diff <= kCanonicalTol,
          "bracket " + fmt("%.3g", br) + ", |conditional - EL| " + fmt("%.3g", diff)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "dof fixture", 1e-3, dof_fixture},
      {2, "central-field brackets", 1.0, brackets},
      {3, "identity suite", 5.0, identity_suite},
      {4, "conservation", 10.0, conservation},
      {5, "oracle agreement", 30.0, oracle},
      {6, "K = 0 Kepler conic", 0.0, kepler_degenerate},
      {7, "spiral fall", 10.0, spiral_fall},
      {8, "conditional residual", 0.0, residuals},
      {9, "multiplier equivalence", 0.0, multiplier},
      {10, "pure-gauge canonical form", 0.0, pure_gauge},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && dt > c.budget_s) {
      out.pass = false;
      out.detail += " over budget";
    }
    if (!out.pass) ++failed;
    std::printf("criterion %2d %s  %s: %s [%.3g s]\n", c.id, out.pass ? "PASS" : "FAIL", c.title.c_str(),
                out.detail.c_str(), dt);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
