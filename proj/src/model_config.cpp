#include "partlag/model_config.hpp"

#include "partlag/toy_models.hpp"

#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/random/sobol.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace partlag::config {

namespace pt = boost::property_tree;

namespace {

// Drop `;` and `#` comments outside double quotes, keeping line numbers.
std::string strip_comments(const std::string& text) {
  std::string out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    bool quoted = false;
    std::size_t cut = line.size();
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (!quoted && (line[i] == ';' || line[i] == '#')) {
        cut = i;
        break;
      }
    }
    out.append(line, 0, cut);
    out += '\n';
  }
  return out;
}

std::string unquote(std::string s) {
  boost::algorithm::trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::string where(const std::string& section, const std::string& key) {
  return "[" + section + "] " + key;
}

double to_double(const std::string& section, const std::string& key, const std::string& text) {
  const std::string s = unquote(text);
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing text");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where(section, key), "expected a number, got '" + s + "'");
  }
}

std::size_t to_count(const std::string& section, const std::string& key, const std::string& text) {
  const double v = to_double(section, key, text);
  if (v < 0 || v != std::floor(v)) throw ConfigError(where(section, key), "expected a count");
  return static_cast<std::size_t>(v);
}

bool to_bool(const std::string& section, const std::string& key, const std::string& text) {
  const std::string s = unquote(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(where(section, key), "expected true or false, got '" + s + "'");
}

// Compile against the given slots so unknown names surface with a location.
void check_expression(const std::string& section, const std::string& key, const std::string& src,
                      const std::vector<std::string>& slots,
                      const std::map<std::string, double>& params) {
  try {
    expr::Program::compile(expr::Expr::parse(src), slots, params);
  } catch (const expr::ParseError& e) {
    throw ConfigError(where(section, key), e.what());
  } catch (const expr::UnboundName& e) {
    throw ConfigError(where(section, key), e.what());
  }
}

double eval_constant(const std::string& section, const std::string& key, const std::string& src,
                     const std::map<std::string, double>& params) {
  try {
    const auto prog = expr::Program::compile(expr::Expr::parse(src), {}, params);
    return prog.eval<double>({});
  } catch (const std::exception& e) {
    throw ConfigError(where(section, key), e.what());
  }
}

const std::set<std::string> kSections = {"model",   "parameters", "constraints", "lagrangian",
                                         "samples", "tolerances", "events",      "invariants",
                                         "integrate", "hamiltonian"};

void apply_tolerances(ModelConfig& c, const pt::ptree& sec) {
  for (const auto& [key, node] : sec) {
    const auto& v = node.data();
    if (key == "rank_tol") c.closure.rank_tol = to_double("tolerances", key, v);
    else if (key == "closure_tol") c.closure.closure_tol = to_double("tolerances", key, v);
    else if (key == "rtol") c.ode.rtol = to_double("tolerances", key, v);
    else if (key == "atol") c.ode.atol = to_double("tolerances", key, v);
    else if (key == "legendre_tol") c.legendre.tol = to_double("tolerances", key, v);
    else if (key == "hessian_tol") c.legendre.hessian_tol = to_double("tolerances", key, v);
    else throw ConfigError(where("tolerances", key), "unknown tolerance");
  }
}

}  // namespace

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char ch : s) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      boost::algorithm::trim(cur);
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  boost::algorithm::trim(cur);
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  return out;
}

ModelConfig parse(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(strip_comments(text));
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()), e.message());
  }
  for (const auto& [name, sec] : tree) {
    if (!kSections.count(name)) throw ConfigError("[" + name + "]", "unknown section");
    if (!sec.data().empty()) throw ConfigError(name, "key outside of any section");
  }
  auto section = [&](const std::string& name) -> const pt::ptree& {
    static const pt::ptree empty;
    auto it = tree.find(name);
    return it == tree.not_found() ? empty : it->second;
  };

  ModelConfig c;
  const auto& model = section("model");
  for (const auto& [key, node] : model) {
    if (key == "name") c.name = unquote(node.data());
    else if (key == "builtin") c.builtin = unquote(node.data());
    else if (key == "n") c.n = to_count("model", key, node.data());
    else if (key == "m") c.m = to_count("model", key, node.data());
    else throw ConfigError(where("model", key), "unknown key");
  }
  if (!c.builtin.empty()) {
    ModelConfig base;
    try {
      base = builtin(c.builtin);
    } catch (const std::out_of_range& e) {
      throw ConfigError(where("model", "builtin"), e.what());
    }
    if (!c.name.empty()) base.name = c.name;
    c = std::move(base);
  }

  for (const auto& [key, node] : section("parameters")) {
    c.parameters[key] = to_double("parameters", key, node.data());
  }

  if (c.builtin.empty()) {
    if (c.n == 0 || c.m == 0) throw ConfigError("[model]", "n and m are required and positive");
    if (c.m > c.n) throw ConfigError("[model]", "m exceeds n");
    const auto xs = expr::indexed_names("x", c.n);
    c.z.assign(c.m, {});
    for (const auto& [key, node] : section("constraints")) {
      std::vector<std::string> comps = split_list(unquote(node.data()));
      if (comps.size() != c.n) {
        throw ConfigError(where("constraints", key),
                          "expected " + std::to_string(c.n) + " components, got " +
                              std::to_string(comps.size()));
      }
      for (const auto& s : comps) check_expression("constraints", key, s, xs, c.parameters);
      if (key == "V") {
        c.v = std::move(comps);
        continue;
      }
      std::size_t a = 0;
      if (key.size() < 2 || key[0] != 'Z' ||
          (a = to_count("constraints", key, key.substr(1))) < 1 || a > c.m) {
        throw ConfigError(where("constraints", key), "expected Z1..Z" + std::to_string(c.m) + " or V");
      }
      c.z[a - 1] = std::move(comps);
    }
    for (std::size_t a = 0; a < c.m; ++a) {
      if (c.z[a].empty()) throw ConfigError("[constraints]", "missing Z" + std::to_string(a + 1));
    }
    if (c.v.empty()) c.v.assign(c.n, "0");
    const auto& lag = section("lagrangian");
    auto it = lag.find("L");
    if (it == lag.not_found() || lag.size() != 1) {
      throw ConfigError("[lagrangian]", "expected exactly one key L");
    }
    c.lagrangian = unquote(it->second.data());
    auto slots = xs;
    for (const auto& u : expr::indexed_names("u", c.m)) slots.push_back(u);
    check_expression("lagrangian", "L", c.lagrangian, slots, c.parameters);
  } else {
    if (!section("constraints").empty() || !section("lagrangian").empty()) {
      throw ConfigError("[model] builtin", "built-in models take no constraints or lagrangian");
    }
  }

  const auto xs = expr::indexed_names("x", c.n);
  for (const auto& [key, node] : section("samples")) {
    if (key == "count") {
      c.sample_count = to_count("samples", key, node.data());
    } else if (key == "singular") {
      c.singular = split_list(unquote(node.data()));
      for (const auto& s : c.singular) check_expression("samples", key, s, xs, c.parameters);
    } else if (key.size() >= 2 && key[0] == 'x') {
      const std::size_t i = to_count("samples", key, key.substr(1));
      if (i < 1 || i > c.n) throw ConfigError(where("samples", key), "no such coordinate");
      const std::string range = unquote(node.data());
      const auto colon = range.find(':');
      if (colon == std::string::npos) throw ConfigError(where("samples", key), "expected min:max");
      const double lo = to_double("samples", key, range.substr(0, colon));
      const double hi = to_double("samples", key, range.substr(colon + 1));
      if (!(lo < hi)) throw ConfigError(where("samples", key), "empty interval");
      if (c.box.size() != c.n) c.box.assign(c.n, {std::nan(""), std::nan("")});
      c.box[i - 1] = {lo, hi};
    } else {
      throw ConfigError(where("samples", key), "unknown key");
    }
  }
  for (const auto& [lo, hi] : c.box) {
    if (std::isnan(lo)) throw ConfigError("[samples]", "box must give every coordinate");
  }
  if (c.box.empty() && c.builtin.empty()) throw ConfigError("[samples]", "sample box is required");

  apply_tolerances(c, section("tolerances"));

  // Events: `name = expr`, then optional name.direction and name.terminal.
  // property_tree keys are literal here, so the dot is part of the key.
  const auto& ev = section("events");
  for (const auto& [key, node] : ev) {
    if (key.find('.') != std::string::npos) continue;
    c.events.erase(std::remove_if(c.events.begin(), c.events.end(),
                                  [&](const EventConfig& e) { return e.name == key; }),
                   c.events.end());
    c.events.push_back({key, unquote(node.data()), 0, true});
  }
  for (const auto& [key, node] : ev) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) continue;
    const std::string name = key.substr(0, dot);
    const std::string attr = key.substr(dot + 1);
    auto e = std::find_if(c.events.begin(), c.events.end(),
                          [&](const EventConfig& x) { return x.name == name; });
    if (e == c.events.end()) throw ConfigError(where("events", key), "no event named " + name);
    if (attr == "direction") {
      const double d = to_double("events", key, node.data());
      if (d != -1 && d != 0 && d != 1) throw ConfigError(where("events", key), "expected -1, 0 or 1");
      e->direction = static_cast<int>(d);
    } else if (attr == "terminal") {
      e->terminal = to_bool("events", key, node.data());
    } else {
      throw ConfigError(where("events", key), "unknown event attribute");
    }
  }

  const auto& inv = section("invariants");
  if (!inv.empty()) c.invariants.clear();
  for (const auto& [key, node] : inv) c.invariants.emplace_back(key, unquote(node.data()));

  for (const auto& [key, node] : section("hamiltonian")) {
    if (key == "momentum_drift") c.zero_momentum_drift = !to_bool("hamiltonian", key, node.data());
    else throw ConfigError(where("hamiltonian", key), "unknown key");
  }

  for (const auto& [key, node] : section("integrate")) {
    if (key == "z0") c.z0 = split_list(unquote(node.data()));
    else if (key == "t0") c.t0 = to_double("integrate", key, node.data());
    else if (key == "t1") c.t1 = to_double("integrate", key, node.data());
    else throw ConfigError(where("integrate", key), "unknown key");
  }
  for (std::size_t i = 0; i < c.z0.size(); ++i) {
    eval_constant("integrate", "z0[" + std::to_string(i + 1) + "]", c.z0[i], c.parameters);
  }
  if (!(c.t1 > c.t0)) throw ConfigError("[integrate]", "t1 must exceed t0");
  if (c.name.empty()) c.name = c.builtin.empty() ? "model" : c.builtin;
  return c;
}

ModelConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.where(),
                      std::string(e.what()).substr(e.where().size() + 2));
  }
}

ModelConfig builtin(const std::string& name) {
  const auto& entry = toy::lookup(name);
  ModelConfig c;
  c.name = name;
  c.builtin = name;
  c.parameters = entry.defaults;
  const auto sys = entry.make(c.parameters);
  c.n = sys.n;
  c.m = sys.m;
  if (name == "central-field") {
    c.parameters.insert({{"r0", 1.0}, {"v0", 0.0}, {"M0", 1.0}, {"K", 0.05}, {"r_min", 1e-3}});
    c.invariants = {{"M", "x3"},
                    {"E", "p1^2/(2*m) - x3^2/(2*m*x1^2) - x1*p2/2 - alpha/x1"},
                    {"K", "x3^2/(4*m) + x1^3*p2/8"}};
    c.events = {{"r_min", "x1 - r_min", -1, true}};
    c.z0 = {"r0", "0", "M0", "m*v0", "(K - M0^2/(4*m))*8/r0^3"};
    c.t1 = 100.0;
  } else if (name == "planar-free") {
    c.invariants = {{"H", "(p1^2 + p2^2)/2 + k*(x1^2 + x2^2)/2"}, {"L3", "x1*p2 - x2*p1"}};
    c.z0 = {"1", "0", "0", "1"};
    c.t1 = 20.0;
  } else if (name == "planar-twisted") {
    c.invariants = {{"H", "p1^2/2 + p2^2/(2*(1 + x1^2)^2) + k*(x1^2 + x2^2)/2"}};
    c.z0 = {"1", "0", "0", "1"};
    c.t1 = 20.0;
  } else if (name == "rotation-drift") {
    c.z0 = {"1", "0", "0", "0.2"};
    c.t1 = 20.0;
  }
  return c;
}

ControlSystem ModelConfig::system() const {
  if (!builtin.empty()) return toy::lookup(builtin).make(parameters);
  return make_control_system(name, n, m, z, v, lagrangian, parameters);
}

std::vector<std::vector<double>> ModelConfig::samples() const {
  if (box.empty()) return toy::lookup(builtin).samples;
  boost::random::sobol gen(n);
  const double span = static_cast<double>(gen.max() - gen.min()) + 1.0;
  std::vector<std::vector<double>> out(sample_count, std::vector<double>(n));
  for (auto& x : out) {
    for (std::size_t i = 0; i < n; ++i) {
      const double u = static_cast<double>(gen() - gen.min()) / span;
      x[i] = box[i].first + u * (box[i].second - box[i].first);
    }
  }
  return out;
}

void ModelConfig::check_singular_loci() const {
  if (singular.empty()) return;
  auto points = samples();
  if (!box.empty()) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      std::vector<double> x(n);
      for (std::size_t i = 0; i < n; ++i) x[i] = (mask >> i) & 1 ? box[i].second : box[i].first;
      points.push_back(std::move(x));
    }
  }
  const auto xs = expr::indexed_names("x", n);
  for (const auto& s : singular) {
    const auto prog = expr::Program::compile(expr::Expr::parse(s), xs, parameters);
    int sign = 0;
    for (const auto& x : points) {
      const double g = prog(x);
      const int sg = (g > 0.0) - (g < 0.0);
      if (sg == 0 || (sign != 0 && sg != sign)) {
        std::ostringstream msg;
        msg << "singular locus '" << s << "' meets the sample box near (";
        for (std::size_t i = 0; i < n; ++i) msg << (i ? ", " : "") << x[i];
        msg << ")";
        throw ConfigError("[samples] singular", msg.str());
      }
      sign = sg;
    }
  }
}

std::vector<double> ModelConfig::initial_state() const {
  std::vector<double> z;
  for (std::size_t i = 0; i < z0.size(); ++i) {
    z.push_back(eval_constant("integrate", "z0[" + std::to_string(i + 1) + "]", z0[i], parameters));
  }
  return z;
}

std::vector<EventSpec> ModelConfig::event_specs(std::size_t m_bar) const {
  std::vector<EventSpec> out;
  for (const auto& e : events) {
    PhaseFunction f;
    try {
      f = PhaseFunction(e.name, e.expression, n, m_bar, parameters);
    } catch (const std::exception& ex) {
      throw ConfigError(where("events", e.name), ex.what());
    }
    out.push_back({e.name, [f](double, std::span<const double> y) { return f(y); }, e.direction,
                   e.terminal});
  }
  return out;
}

std::vector<PhaseFunction> ModelConfig::invariant_functions(std::size_t m_bar) const {
  std::vector<PhaseFunction> out;
  for (const auto& [name, src] : invariants) {
    try {
      out.emplace_back(name, src, n, m_bar, parameters);
    } catch (const std::exception& ex) {
      throw ConfigError(where("invariants", name), ex.what());
    }
  }
  return out;
}

}  // namespace partlag::config
