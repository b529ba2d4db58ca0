#include "partlag/dofcount.hpp"

#include <doctest.h>

#include <string>

using namespace partlag::dof;

TEST_CASE("builtin tables") {
  CHECK(dof(builtin("cotton")) == 6);
  CHECK(dof(builtin("einstein-linear")) == 4);
  CHECK(dof(builtin("central-field")) == 5);
  CHECK(dof(builtin("central-field-multiplier")) == 6);
  CHECK(builtin_names().size() == 4);
  CHECK_THROWS_AS(builtin("nordstrom"), std::out_of_range);
}

TEST_CASE("fixture files agree with the builtins") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    const auto t = load_table(std::string(PARTLAG_SOURCE_DIR) + "/data/dof/" + name + ".dof");
    const auto b = builtin(name);
    CHECK(t.label == b.label);
    CHECK(t.equations == b.equations);
    CHECK(t.identities == b.identities);
    CHECK(t.symmetries == b.symmetries);
  }
}

TEST_CASE("single ODE of order n has n degrees of freedom") {
  for (int n = 1; n <= 5; ++n) {
    InvolutiveTable t;
    t.equations[n] = 1;
    CHECK(dof(t) == n);
  }
  CHECK(dof(InvolutiveTable{}) == 0);
}

TEST_CASE("count is additive over merged tables") {
  const auto a = builtin("central-field");
  const auto b = builtin("cotton");
  CHECK(dof(a.merged(b)) == dof(a) + dof(b));
  CHECK(dof(a.merged(InvolutiveTable{})) == dof(a));
}

TEST_CASE("gauge symmetry removes, reducibility adds back") {
  // Maxwell: 4 second-order equations, one first-order gauge symmetry and
  // one third-order identity.
  const auto t = parse_table("t2 = 4\nr1.0 = 1\nl3.0 = 1\n");
  CHECK(dof(t) == 2 * 4 - 1 - 3);
  const auto red = parse_table("t1 = 3\nr1.0 = 2\nr1.1 = 1\n");
  CHECK(dof(red) == 3 - (2 - 1));
}

TEST_CASE("table parsing") {
  const auto t = parse_table("# comment\nlabel = demo\n t2 = 3 # trailing\nt2 = 1\n\nr1.0 = 2\n");
  CHECK(t.label == "demo");
  CHECK(t.equations.at(2) == 4);  // repeated keys add up
  CHECK(t.symmetries.at({1, 0}) == 2);
  try {
    parse_table("t2 = 1\nx9 = 3\n");
    FAIL("no error");
  } catch (const TableParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_table("t2 = -1\n"), TableParseError);
  CHECK_THROWS_AS(parse_table("t2 = two\n"), TableParseError);
  InvolutiveTable bad;
  bad.equations[-1] = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
