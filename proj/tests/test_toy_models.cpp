#include "partlag/central_field.hpp"
#include "partlag/geometry.hpp"
#include "partlag/toy_models.hpp"

#include <doctest.h>

using namespace partlag;

TEST_CASE("each toy closes into its declared regime") {
  for (const auto& e : toy::registry()) {
    CAPTURE(e.name);
    const auto sys = e.make(e.defaults);
    const auto cl = close_distribution(sys, e.samples);
    CHECK(toy::regime_of(cl) == e.regime);
  }
  CHECK(toy::lookup("central-field").regime == toy::Regime::OneStepNonintegrable);
  CHECK(toy::lookup("planar-free").regime == toy::Regime::PureGauge);
  CHECK(toy::lookup("rotation-drift").regime == toy::Regime::Integrable);
  CHECK_THROWS_AS(toy::lookup("nope"), std::out_of_range);
}

TEST_CASE("free planar particle moves on straight lines") {
  toy::PlanarParams p;
  p.potential = "0";
  const auto sys = toy::planar_free(p);
  const auto hs = HamiltonianSystem::build(sys, close_distribution(sys, toy::lookup("planar-free").samples));
  const auto tr = integrate(hs, {0.1, 0.2, 0.5, -0.3}, 0, 4);
  const auto& y = tr.states().back();
  CHECK(y[0] == doctest::Approx(0.1 + 0.5 * 4));
  CHECK(y[1] == doctest::Approx(0.2 - 0.3 * 4));
  CHECK(y[2] == 0.5);
  CHECK(y[3] == -0.3);
}

TEST_CASE("parameters reach the model") {
  const auto& e = toy::lookup("rotation-drift");
  auto params = e.defaults;
  params["c"] = 0.0;
  const auto sys = e.make(params);
  const double x[] = {1.0, 0.0, 0.0};
  CHECK(sys.drift(x)[2] == 0.0);
}
