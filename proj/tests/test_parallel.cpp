#include "partlag/central_field.hpp"
#include "partlag/parallel.hpp"
#include "partlag/toy_models.hpp"

#include <doctest.h>

#include <random>

using namespace partlag;

TEST_CASE("batch integration matches the serial reference") {
  const central::Params P;
  const auto hs = central::hamiltonian_system(P);
  std::vector<std::vector<double>> z0;
  for (double r : {0.9, 1.0, 1.1, 1.3}) z0.push_back(central::initial_state(r, 0.1, 0, 1, 0.03, P));
  z0.push_back({0.0, 0, 1, 0, 0});  // r = 0: fails
  const auto a = par::integrate_batch(hs, z0, 0, 10, {}, {}, central::invariant_observables(P));
  const auto b = par::integrate_batch_serial(hs, z0, 0, 10, {}, {}, central::invariant_observables(P));
  REQUIRE(a.size() == z0.size());
  for (std::size_t i = 0; i + 1 < z0.size(); ++i) {
    REQUIRE(a[i].trajectory);
    REQUIRE(b[i].trajectory);
    CHECK(a[i].trajectory->times() == b[i].trajectory->times());
    CHECK(a[i].trajectory->states() == b[i].trajectory->states());
    CHECK(a[i].trajectory->ledger() == b[i].trajectory->ledger());
  }
  CHECK_FALSE(a.back().trajectory);
  CHECK_FALSE(a.back().error.empty());
  CHECK(a.back().error == b.back().error);
}

TEST_CASE("identity suite and residual batch match the serial reference") {
  const auto hs = central::hamiltonian_system();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> R(0.5, 3), U(-1, 1);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({R(rng), U(rng), U(rng), U(rng), U(rng)});
  const auto a = par::identity_suite(hs, pts);
  const auto b = par::identity_suite_serial(hs, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(a[i].jacobi == b[i].jacobi);
    CHECK(a[i].drift == b[i].drift);
    CHECK(a[i].antisymmetry == b[i].antisymmetry);
  }

  const central::Params P;
  const auto t1 = integrate(hs, central::initial_state(1, 0.1, 0, 1, 0.02, P), 0, 5);
  const auto t2 = integrate(hs, central::initial_state(1.2, 0, 0, 0.9, 0.0, P), 0, 5);
  const std::vector<const Trajectory*> trs{&t1, &t2};
  CHECK(par::residual_batch(hs, trs) == par::residual_batch_serial(hs, trs));
  CHECK(par::max_threads() >= 1);
}
