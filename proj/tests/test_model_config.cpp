#include "partlag/model_config.hpp"

#include <doctest.h>

#include <string>

using namespace partlag;

namespace {

std::string path(const char* name) { return std::string(PARTLAG_SOURCE_DIR) + "/configs/" + name; }

const char* kMinimal = R"([model]
name = line
n = 1
m = 1

[constraints]
Z1 = "1"

[lagrangian]
L = "u1^2/2 - x1^2/2"

[samples]
x1 = -1:1
count = 4
)";

std::string where_of(const std::string& text) {
  try {
    config::parse(text);
  } catch (const config::ConfigError& e) {
    return e.where();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config") {
  const auto c = config::parse(kMinimal);
  CHECK(c.name == "line");
  CHECK(c.n == 1);
  CHECK(c.v == std::vector<std::string>{"0"});
  CHECK(c.samples().size() == 4);
  CHECK(c.samples()[0] == std::vector<double>{0.0});  // box centre first
  const auto sys = c.system();
  const double x[] = {0.3};
  CHECK(sys.generators[0](x)[0] == 1.0);
}

TEST_CASE("shipped central-field config equals the builtin") {
  const auto file = config::load(path("central-field.ini"));
  const auto b = config::builtin("central-field");
  CHECK(file.n == b.n);
  CHECK(file.initial_state() == b.initial_state());
  CHECK(file.t1 == b.t1);
  CHECK(file.ode.rtol == b.ode.rtol);
  REQUIRE(file.events.size() == 1);
  CHECK(file.events[0].direction == -1);
  CHECK(file.invariants.size() == 3);
  const auto z = file.initial_state();
  CHECK(z[4] == doctest::Approx((0.05 - 0.25) * 8));
}

TEST_CASE("errors carry their location") {
  CHECK(where_of("[model]\nname = x\nn = 1\nm = 1\n[bogus]\nkey = 1\n") == "[bogus]");
  CHECK(where_of(std::string(kMinimal) + "[tolerances]\nrtol = fast\n") == "[tolerances] rtol");
  CHECK(where_of(std::string(kMinimal) + "[tolerances]\nspeed = 1\n") == "[tolerances] speed");
  CHECK(where_of(std::string(kMinimal) + "[integrate]\nt0 = 5\nt1 = 1\n") == "[integrate]");
  CHECK(where_of("[model]\nn = 1\nm = 2\n") == "[model]");
  CHECK(where_of("[model\nn = 1\n").rfind("line ", 0) == 0);
  std::string bad_z = kMinimal;
  bad_z.replace(bad_z.find("Z1 = \"1\""), 8, "Z1 = \"1, 2\"");
  CHECK(where_of(bad_z) == "[constraints] Z1");
  CHECK_THROWS_AS(config::load(path("missing.ini")), config::ConfigError);
}

TEST_CASE("singular loci") {
  const auto ok = config::parse(std::string(kMinimal) + "singular = \"x1 + 2\"\n");
  CHECK_NOTHROW(ok.check_singular_loci());
  const auto bad = config::parse(std::string(kMinimal) + "singular = \"x1\"\n");
  CHECK_THROWS_AS(bad.check_singular_loci(), config::ConfigError);
}

TEST_CASE("builtins") {
  for (const char* name : {"central-field", "planar-free", "planar-twisted", "rotation-drift"}) {
    CAPTURE(name);
    const auto c = config::builtin(name);
    CHECK(c.builtin == name);
    CHECK_FALSE(c.samples().empty());
    if (std::string(name) != "rotation-drift") CHECK_FALSE(c.invariants.empty());
    CHECK(c.initial_state().size() >= c.n);
  }
  CHECK_THROWS(config::builtin("nope"));
}

TEST_CASE("comments") {
  const auto c = config::parse("# head\n[model] ; trailing\nname = c # x\nn = 1 ; states\nm = 1\n"
                               "[constraints]\nZ1 = \"1\" ; one\n[lagrangian]\nL = \"u1^2/2\"\n"
                               "[samples]\nx1 = 0:1\n");
  CHECK(c.name == "c");
  CHECK(c.n == 1);
  CHECK(where_of("; one\n; two\n[model\n").rfind("line 3", 0) == 0);
}

TEST_CASE("split_list respects parentheses") {
  CHECK(config::split_list("a, f(b, c), d") == std::vector<std::string>{"a", "f(b, c)", "d"});
  CHECK(config::split_list("x") == std::vector<std::string>{"x"});
}
