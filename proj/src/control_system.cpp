#include "partlag/control_system.hpp"

namespace partlag {

ControlSystem make_control_system(const std::string& name, std::size_t n, std::size_t m,
                                  const std::vector<std::vector<std::string>>& z,
                                  const std::vector<std::string>& v, const std::string& lagrangian,
                                  const std::map<std::string, double>& parameters) {
  if (n == 0 || m == 0) throw std::invalid_argument("n and m must be positive");
  if (m > n) throw std::invalid_argument("more controls than states");
  if (z.size() != m) {
    throw std::invalid_argument("expected " + std::to_string(m) + " generators, got " +
                                std::to_string(z.size()));
  }
  if (v.size() != n) {
    throw std::invalid_argument("drift needs " + std::to_string(n) + " components, got " +
                                std::to_string(v.size()));
  }
  const auto xs = expr::indexed_names("x", n);
  auto field = [&](const std::string& label, const std::vector<std::string>& comps) {
    if (comps.size() != n) {
      throw std::invalid_argument(label + " needs " + std::to_string(n) + " components, got " +
                                  std::to_string(comps.size()));
    }
    std::vector<expr::Program> progs;
    for (const auto& c : comps) progs.push_back(expr::Program::compile(expr::Expr::parse(c), xs, parameters));
    return VectorField::from_programs(label, std::move(progs));
  };

  ControlSystem sys;
  sys.name = name;
  sys.n = n;
  sys.m = m;
  sys.parameters = parameters;
  for (std::size_t a = 0; a < m; ++a) {
    sys.generators.push_back(field(m == 1 ? "Z" : "Z" + std::to_string(a + 1), z[a]));
  }
  sys.drift = field("V", v);
  auto slots = xs;
  for (const auto& u : expr::indexed_names("u", m)) slots.push_back(u);
  sys.lagrangian = expr::Program::compile(expr::Expr::parse(lagrangian), slots, parameters);
  sys.control_box.assign(m, {-10.0, 10.0});
  return sys;
}

}  // namespace partlag
