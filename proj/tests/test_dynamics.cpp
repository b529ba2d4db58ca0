#include "partlag/central_field.hpp"
#include "partlag/dynamics.hpp"
#include "partlag/toy_models.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace partlag;

namespace {

// y'' = -y, y(0) = 1, y'(0) = 0.
OdeRhs oscillator() {
  return [](double, std::span<const double> y) { return std::vector<double>{y[1], -y[0]}; };
}

double oscillator_error(double rtol) {
  OdeOptions o;
  o.rtol = rtol;
  o.atol = rtol * 1e-2;
  const auto tr = integrate_ode(oscillator(), {1.0, 0.0}, 0.0, 10.0, o);
  double err = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    err = std::max(err, std::fabs(tr.states()[i][0] - std::cos(tr.times()[i])));
  }
  return err;
}

double ledger_drift(const Trajectory& tr) {
  double w = 0.0;
  for (const auto& col : tr.ledger()) {
    for (double v : col) w = std::max(w, std::fabs(v - col[0]) / std::max(1.0, std::fabs(col[0])));
  }
  return w;
}

HamiltonianSystem build(const ControlSystem& sys, const std::vector<std::vector<double>>& samples) {
  return HamiltonianSystem::build(sys, close_distribution(sys, samples));
}

}  // namespace

TEST_CASE("oscillator accuracy and order") {
  const double coarse = oscillator_error(1e-6);
  const double fine = oscillator_error(1e-10);
  CHECK(fine < 1e-8);
  CHECK(coarse / fine >= 1e3);
}

TEST_CASE("timestamps are strictly increasing and end on t1") {
  const auto tr = integrate_ode(oscillator(), {1.0, 0.0}, 0.0, 7.5);
  for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr.times()[i] > tr.times()[i - 1]);
  CHECK(tr.t_end() == 7.5);
  CHECK(tr.termination() == Trajectory::Termination::TEnd);
  CHECK(tr.step_sizes().size() + 1 == tr.size());
}

TEST_CASE("dense output matches accepted states") {
  const auto tr = integrate_ode(oscillator(), {1.0, 0.0}, 0.0, 5.0);
  for (std::size_t i = 0; i < tr.size(); i += 7) {
    const auto a = tr.state_at(tr.times()[i]);
    const auto b = tr.smooth_state_at(tr.times()[i]);
    CHECK(a[0] == doctest::Approx(tr.states()[i][0]).epsilon(1e-13));
    CHECK(b[0] == doctest::Approx(tr.states()[i][0]).epsilon(1e-12));
  }
  for (double t : {0.123, 1.7, 3.33, 4.99}) {
    CHECK(std::fabs(tr.state_at(t)[0] - std::cos(t)) < 1e-8);
    CHECK(std::fabs(tr.smooth_state_at(t)[1] + std::sin(t)) < 1e-8);
  }
}

TEST_CASE("fixed step mode takes the requested step") {
  OdeOptions o;
  o.fixed_step = true;
  o.h_initial = 0.01;
  const auto tr = integrate_ode(oscillator(), {1.0, 0.0}, 0.0, 1.0, o);
  CHECK(tr.size() == 101);
  CHECK(std::fabs(tr.states().back()[0] - std::cos(1.0)) < 1e-10);
}

TEST_CASE("blow-up raises IntegrationError") {
  const OdeRhs f = [](double, std::span<const double> y) { return std::vector<double>{y[0] * y[0]}; };
  CHECK_THROWS_AS(integrate_ode(f, {1.0}, 0.0, 2.0), IntegrationError);
}

TEST_CASE("event location on the oscillator") {
  EventSpec zero{"zero", [](double, std::span<const double> y) { return y[0]; }, -1, true};
  const auto tr = integrate_ode(oscillator(), {1.0, 0.0}, 0.0, 10.0, {}, {zero});
  REQUIRE(tr.events().size() == 1);
  CHECK(tr.termination() == Trajectory::Termination::Event);
  CHECK(tr.events()[0].t == doctest::Approx(std::numbers::pi / 2).epsilon(1e-10));
  CHECK(tr.t_end() == doctest::Approx(std::numbers::pi / 2).epsilon(1e-10));

  EventSpec up{"up", [](double, std::span<const double> y) { return y[0]; }, 1, false};
  const auto t2 = integrate_ode(oscillator(), {1.0, 0.0}, 0.0, 12.0, {}, {up});
  REQUIRE(t2.events().size() == 2);
  CHECK(t2.events()[0].t == doctest::Approx(1.5 * std::numbers::pi).epsilon(1e-10));
  CHECK(t2.events()[1].t == doctest::Approx(3.5 * std::numbers::pi).epsilon(1e-10));
  CHECK(t2.t_end() == 12.0);
}

TEST_CASE("circular orbit stays at r = 1") {
  const central::Params P;
  const auto hs = central::hamiltonian_system(P);
  const auto tr = integrate(hs, central::initial_state(1, 0, 0, 1, 0, P), 0, 100);
  double w = 0.0;
  for (const auto& y : tr.states()) w = std::max(w, std::fabs(y[0] - 1.0));
  CHECK(w <= 1e-8);
  // phidot = 1: angle equals time.
  CHECK(tr.states().back()[1] == doctest::Approx(100.0).epsilon(1e-9));
}

TEST_CASE("central-field ledger is conserved") {
  const central::Params P;
  const auto hs = central::hamiltonian_system(P);
  const auto tr = integrate(hs, central::initial_state(1, 0, 0, 1, 0.05, P), 0, 100, {}, {},
                            central::invariant_observables(P));
  CHECK(tr.ledger_names() == std::vector<std::string>{"M", "E", "K"});
  CHECK(ledger_drift(tr) <= 1e-8);
}

TEST_CASE("fall event time is stable under tolerance") {
  const central::Params P;
  const auto hs = central::hamiltonian_system(P);
  const auto z = central::initial_state(1, 0, 0, 1, 0.3, P);
  auto run = [&](double rtol) {
    OdeOptions o;
    o.rtol = rtol;
    o.atol = rtol * 1e-2;
    return integrate(hs, z, 0, 100, o, {central::fall_event(1e-3)});
  };
  const auto a = run(1e-8), b = run(1e-12);
  REQUIRE(a.events().size() == 1);
  REQUIRE(b.events().size() == 1);
  CHECK(std::fabs(a.events()[0].t - b.events()[0].t) <= 1e-6);
  CHECK(b.events()[0].y[0] == doctest::Approx(1e-3).epsilon(1e-8));
}

TEST_CASE("conditional residual vanishes on solutions only") {
  const central::Params P;
  const auto hs = central::hamiltonian_system(P);
  const auto tr = integrate(hs, central::initial_state(1.1, 0.1, 0, 1, 0.05, P), 0, 20);
  const auto ok = conditional_residual(hs, tr);
  CHECK(ok.max_abs <= 1e-6);
  CHECK(ok.names.size() == 1 + 2 + 1);
  for (std::size_t c = 0; c < hs.dim(); ++c) {
    CHECK(conditional_residual(hs, tr.perturbed(c, 1 + 1e-4)).max_abs >= 1e-5);
  }
}

TEST_CASE("planar conditional residual agrees with Euler-Lagrange") {
  for (const char* name : {"planar-free", "planar-twisted"}) {
    CAPTURE(name);
    const auto& e = toy::lookup(name);
    const auto hs = build(e.make(e.defaults), e.samples);
    const auto tr = integrate(hs, {0.7, -0.3, 0.2, 0.4}, 0, 10);
    // Smooth run with long steps: a finer stencil keeps the two
    // reconstructions' truncation error apart from the comparison.
    ResidualOptions ro;
    ro.fd_factor = 0.2;
    const auto a = conditional_residual(hs, tr, ro);
    const auto b = euler_lagrange_residual(hs, tr, ro);
    REQUIRE(a.t == b.t);
    for (std::size_t i = 0; i < a.t.size(); ++i) {
      for (std::size_t k = 0; k < 2; ++k) CHECK(std::fabs(a.values[i][k] - b.values[i][k]) <= 1e-8);
    }
    CHECK(b.max_abs <= 1e-8);
  }
  // Default settings on the identity frame: the two coincide.
  const auto& e = toy::lookup("planar-free");
  const auto hs = build(e.make(e.defaults), e.samples);
  const auto tr = integrate(hs, {0.7, -0.3, 0.2, 0.4}, 0, 10);
  CHECK(conditional_residual(hs, tr).max_abs <= 1e-8);
  CHECK(euler_lagrange_residual(hs, tr).max_abs <= 1e-8);
}

TEST_CASE("Euler-Lagrange residual detects a non-solution") {
  // Quartic well: scaling a solution does not give another one.
  const auto sys = make_control_system("quartic", 2, 2, {{"1", "0"}, {"0", "1"}}, {"0", "0"},
                                       "(u1^2 + u2^2)/2 - (x1^4 + x2^4)/4", {});
  const auto hs = build(sys, toy::lookup("planar-free").samples);
  const auto tr = integrate(hs, {0.7, -0.3, 0.2, 0.4}, 0, 10);
  CHECK(euler_lagrange_residual(hs, tr).max_abs <= 1e-7);
  CHECK(euler_lagrange_residual(hs, tr.perturbed(0, 1 + 1e-3)).max_abs >= 1e-5);
}

TEST_CASE("central difference helpers") {
  const auto f = [](double t) { return std::sin(t); };
  CHECK(central_diff(f, 0.3, 1e-3) == doctest::Approx(std::cos(0.3)).epsilon(1e-12));
  CHECK(central_diff2(f, 0.3, 1e-2) == doctest::Approx(-std::sin(0.3)).epsilon(1e-8));
}
