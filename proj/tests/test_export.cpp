#include "partlag/central_field.hpp"
#include "partlag/export.hpp"

#include <doctest.h>

#include <cstdlib>
#include <sstream>

using namespace partlag;

TEST_CASE("numbers round-trip at 17 digits") {
  CHECK(io::format_number(0.1) == "0.10000000000000001");
  CHECK(io::format_number(1.0) == "1");
  CHECK(io::format_number(-2.5e-300) == "-2.5e-300");
  for (double v : {1.0 / 3, 2.0 / 7, 1e-17, 123456.789}) {
    CHECK(std::strtod(io::format_number(v).c_str(), nullptr) == v);
  }
}

TEST_CASE("CSV layout and event trailer") {
  const central::Params P;
  const auto hs = central::hamiltonian_system(P);
  const auto k = central::constants_from_shape(central::OrbitTag::BoundedFallSpiral, 3, 1.5, 1, P);
  const auto c = central::classify(P, 1, k.E, k.K);
  const auto tr = integrate(hs, central::initial_state(c.p_latus / (c.e - 1), 0, 0, 1, k.K, P), 0, 10, {},
                            {central::fall_event(1e-3)}, central::invariant_observables(P));
  std::ostringstream out;
  io::write_csv(out, tr, hs.coordinate_names());
  const std::string s = out.str();
  CHECK(s.find('\r') == std::string::npos);
  CHECK(s.rfind("t,x1,x2,x3,p1,p2,M,E,K\n", 0) == 0);
  std::istringstream in(s);
  std::string line;
  std::size_t rows = 0, events = 0;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.rfind("# event: ", 0) == 0) {
      ++events;
      CHECK(line.rfind("# event: r_min t=", 0) == 0);
      continue;
    }
    CHECK(events == 0);  // trailer comes last
    CHECK(std::count(line.begin(), line.end(), ',') == 8);
    ++rows;
  }
  CHECK(rows == tr.size());
  CHECK(events == 1);

  std::ostringstream again;
  io::write_csv(again, tr, hs.coordinate_names());
  CHECK(again.str() == s);
}

TEST_CASE("gnuplot script") {
  std::ostringstream out;
  io::write_plot_script(out, "orbit.csv", {"t", "x1", "x2"}, io::PlotKind::Polar, "orbit");
  const auto s = out.str();
  CHECK(s.find("set polar") != std::string::npos);
  CHECK(s.find("'orbit.csv'") != std::string::npos);
  CHECK(s.find("using 3:2") != std::string::npos);
  CHECK(s.find("set datafile separator ','") != std::string::npos);
}
