// partlag: closure, Hamiltonian form, integration and checks of
// partially Lagrangian systems.

#include "partlag/central_field.hpp"
#include "partlag/dofcount.hpp"
#include "partlag/export.hpp"
#include "partlag/model_config.hpp"
#include "partlag/parallel.hpp"
#include "partlag/toy_models.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace partlag;
using json = nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kDomain = 1;
constexpr int kUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numeric flag that may be written as an expression ("8/7", "-1e-3").
double number(const std::string& flag, const std::string& text) {
  try {
    const auto prog = expr::Program::compile(expr::Expr::parse(text), {}, {});
    return prog.eval<double>({});
  } catch (const std::exception& e) {
    throw UsageError(flag + ": " + e.what());
  }
}

std::vector<double> numbers(const std::string& flag, const std::string& text) {
  std::vector<double> out;
  for (const auto& s : config::split_list(text)) out.push_back(number(flag, s));
  return out;
}

// ---- model selection ------------------------------------------------------------

struct ModelArgs {
  std::string config_path;
  std::string model;
  std::vector<std::string> sets;
  std::optional<double> rank_tol, closure_tol, rtol, atol, legendre_tol, hessian_tol;
};

void add_model_args(CLI::App* cmd, ModelArgs& a) {
  auto* cfg = cmd->add_option("-c,--config", a.config_path, "model file");
  auto* mod = cmd->add_option("-m,--model", a.model,
                              "built-in model: central-field, planar-free, planar-twisted, "
                              "rotation-drift");
  cfg->excludes(mod);
  cmd->add_option("--set", a.sets, "override a parameter, NAME=VALUE");
  cmd->add_option("--rank-tol", a.rank_tol, "closure rank tolerance");
  cmd->add_option("--closure-tol", a.closure_tol, "closure residual tolerance");
  cmd->add_option("--rtol", a.rtol, "integrator relative tolerance");
  cmd->add_option("--atol", a.atol, "integrator absolute tolerance");
  cmd->add_option("--legendre-tol", a.legendre_tol, "Legendre Newton tolerance");
  cmd->add_option("--hessian-tol", a.hessian_tol, "minimum |det d2L/du du|");
}

config::ModelConfig load_model(const ModelArgs& a) {
  config::ModelConfig c;
  if (!a.config_path.empty()) {
    c = config::load(a.config_path);
  } else if (!a.model.empty()) {
    try {
      c = config::builtin(a.model);
    } catch (const std::out_of_range& e) {
      throw UsageError(e.what());
    }
  } else {
    throw UsageError("one of --config or --model is required");
  }
  for (const auto& s : a.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects NAME=VALUE, got '" + s + "'");
    c.parameters[s.substr(0, eq)] = number("--set", s.substr(eq + 1));
  }
  if (a.rank_tol) c.closure.rank_tol = *a.rank_tol;
  if (a.closure_tol) c.closure.closure_tol = *a.closure_tol;
  if (a.rtol) c.ode.rtol = *a.rtol;
  if (a.atol) c.ode.atol = *a.atol;
  if (a.legendre_tol) c.legendre.tol = *a.legendre_tol;
  if (a.hessian_tol) c.legendre.hessian_tol = *a.hessian_tol;
  c.check_singular_loci();
  return c;
}

HamiltonizeOptions hamiltonize_options(const config::ModelConfig& c) {
  HamiltonizeOptions o;
  o.legendre = c.legendre;
  o.zero_momentum_drift = c.zero_momentum_drift;
  return o;
}

HamiltonianSystem build_system(const config::ModelConfig& c) {
  const auto sys = c.system();
  return HamiltonianSystem::build(sys, close_distribution(sys, c.samples(), c.closure),
                                  hamiltonize_options(c));
}

// Phase points: each x sample paired with a fixed momentum pattern.
std::vector<std::vector<double>> phase_points(const config::ModelConfig& c, std::size_t m_bar,
                                              std::size_t count) {
  const auto xs = c.samples();
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k < count; ++k) {
    auto z = xs[k % xs.size()];
    for (std::size_t a = 0; a < m_bar; ++a) {
      z.push_back(0.3 * std::cos(1.7 * static_cast<double>(k) + 0.9 * static_cast<double>(a)) +
                  0.1 * static_cast<double>(a + 1));
    }
    out.push_back(std::move(z));
  }
  return out;
}

// ---- closure ----------------------------------------------------------------------

const char* origin_name(VectorField::Origin o) {
  switch (o) {
    case VectorField::Origin::User: return "user";
    case VectorField::Origin::Bracket: return "bracket";
    case VectorField::Origin::DriftBracket: return "drift-bracket";
  }
  return "?";
}

int cmd_closure(const ModelArgs& args, bool as_json) {
  const auto c = load_model(args);
  const auto sys = c.system();
  const auto closure = close_distribution(sys, c.samples(), c.closure);
  json basis = json::array();
  for (std::size_t i = 0; i < closure.basis().size(); ++i) {
    const auto& f = closure.basis()[i];
    json b = {{"index", i}, {"label", f.label()}, {"origin", origin_name(f.origin())},
              {"nesting", f.nesting()}};
    if (f.origin() != VectorField::Origin::User) {
      b["left"] = f.left();
      if (f.origin() == VectorField::Origin::Bracket) b["right"] = f.right();
    }
    basis.push_back(b);
  }
  const json report = {{"model", c.name},
                       {"n", closure.n()},
                       {"m", closure.m()},
                       {"m_bar", closure.m_bar()},
                       {"pure_gauge", closure.pure_gauge()},
                       {"one_step_pattern", closure.one_step_pattern()},
                       {"regime", toy::to_string(toy::regime_of(closure))},
                       {"sweeps", closure.sweeps()},
                       {"samples", closure.samples().size()},
                       {"max_structure_residual", closure.max_sample_residual()},
                       {"basis", basis}};
  if (as_json) {
    std::cout << report.dump(2) << '\n';
    return kOk;
  }
  std::cout << "model " << c.name << ": n=" << closure.n() << " m=" << closure.m()
            << " m_bar=" << closure.m_bar() << "\n";
  for (const auto& b : basis) {
    std::cout << "  [" << b["index"].get<std::size_t>() << "] " << b["label"].get<std::string>()
              << "  (" << b["origin"].get<std::string>();
    if (b.contains("left")) {
      std::cout << " of " << b["left"].get<std::size_t>();
      if (b.contains("right")) std::cout << ", " << b["right"].get<std::size_t>();
    }
    std::cout << ")\n";
  }
  std::cout << "pure_gauge=" << (closure.pure_gauge() ? "true" : "false")
            << " regime=" << report["regime"].get<std::string>()
            << " max_structure_residual=" << io::format_number(closure.max_sample_residual())
            << "\n";
  return kOk;
}

// ---- hamiltonize --------------------------------------------------------------------

int cmd_hamiltonize(const ModelArgs& args, const std::string& at, bool canonical, bool as_json) {
  const auto c = load_model(args);
  auto hs = build_system(c);
  std::vector<double> z = at.empty() ? phase_points(c, hs.m_bar(), 1).front() : numbers("--at", at);
  if (z.size() != hs.dim()) {
    throw UsageError("--at needs " + std::to_string(hs.dim()) + " components");
  }
  json report = {{"model", c.name}, {"coordinates", hs.coordinate_names()}, {"at", z}};
  if (canonical) {
    report["canonical_bracket_residual"] = canonical_bracket_residual(hs, z);
    const auto can = canonicalize_pure_gauge(hs);
    z = can.to_canonical(z);
    hs = can;
    report["coordinates"] = hs.coordinate_names();
    report["at_canonical"] = z;
  }
  const auto g = hs.geometry<double>(z);
  json pi = json::array();
  for (std::size_t i = 0; i < hs.dim(); ++i) {
    std::vector<double> row(hs.dim());
    for (std::size_t j = 0; j < hs.dim(); ++j) row[j] = g.poisson(i, j);
    pi.push_back(row);
  }
  report["poisson"] = pi;
  report["drift"] = g.drift;
  report["H"] = hs.hamiltonian(z);
  report["controls"] = hs.controls(z);
  report["rhs"] = hs.rhs(z);
  if (as_json) {
    std::cout << report.dump(2) << '\n';
    return kOk;
  }
  const auto names = hs.coordinate_names();
  std::cout << "phase coordinates:";
  for (const auto& n : names) std::cout << ' ' << n;
  std::cout << "\nnonzero brackets at (";
  for (std::size_t i = 0; i < z.size(); ++i) std::cout << (i ? ", " : "") << io::format_number(z[i]);
  std::cout << "):\n";
  for (std::size_t i = 0; i < hs.dim(); ++i) {
    for (std::size_t j = i + 1; j < hs.dim(); ++j) {
      if (g.poisson(i, j) != 0.0) {
        std::cout << "  {" << names[i] << ", " << names[j] << "} = " << io::format_number(g.poisson(i, j))
                  << '\n';
      }
    }
  }
  std::cout << "drift:";
  for (double d : g.drift) std::cout << ' ' << io::format_number(d);
  std::cout << "\nH = " << io::format_number(report["H"].get<double>()) << '\n';
  if (report.contains("canonical_bracket_residual")) {
    std::cout << "canonical bracket residual = "
              << io::format_number(report["canonical_bracket_residual"].get<double>()) << '\n';
  }
  return kOk;
}

// ---- integrate ------------------------------------------------------------------------

struct IntegrateArgs {
  std::string z0;
  std::optional<double> t0, t1;
  std::string out;
  std::string plot_script;
  std::string sweep;
};

io::PlotKind plot_kind(const config::ModelConfig& c) {
  if (c.builtin == "central-field") return io::PlotKind::Polar;
  if (c.n >= 2) return io::PlotKind::Plane;
  return io::PlotKind::TimeSeries;
}

json integration_error(const IntegrationError& e) {
  return {{"error", "integration"}, {"kind", e.kind_name()}, {"t", e.t()},
          {"state", e.state()},     {"message", e.what()}};
}

void write_outputs(const config::ModelConfig& c, const HamiltonianSystem& hs,
                   const Trajectory& traj, const std::string& out, const std::string& plot) {
  if (out.empty() || out == "-") {
    io::write_csv(std::cout, traj, hs.coordinate_names());
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + out);
    io::write_csv(f, traj, hs.coordinate_names());
  }
  if (!plot.empty()) {
    std::ofstream f(plot, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + plot);
    auto cols = hs.coordinate_names();
    cols.insert(cols.begin(), "t");
    for (const auto& n : traj.ledger_names()) cols.push_back(n);
    io::write_plot_script(f, out.empty() ? "-" : out, cols, plot_kind(c), c.name);
  }
}

Trajectory run(const config::ModelConfig& c, const HamiltonianSystem& hs, std::vector<double> z0,
               double t0, double t1) {
  if (z0.size() != hs.dim()) {
    throw UsageError("initial state needs " + std::to_string(hs.dim()) + " components (" +
                     std::to_string(hs.n()) + " x, " + std::to_string(hs.m_bar()) + " p), got " +
                     std::to_string(z0.size()));
  }
  std::vector<Observable> ledger;
  for (const auto& f : c.invariant_functions(hs.m_bar())) ledger.push_back(observable(f));
  return integrate(hs, std::move(z0), t0, t1, c.ode, c.event_specs(hs.m_bar()), ledger);
}

int cmd_integrate(const ModelArgs& args, const IntegrateArgs& ia) {
  auto c = load_model(args);
  const double t0 = ia.t0.value_or(c.t0);
  const double t1 = ia.t1.value_or(c.t1);
  if (!(t1 > t0)) throw UsageError("t1 must exceed t0");

  if (ia.sweep.empty()) {
    const auto hs = build_system(c);
    auto z0 = ia.z0.empty() ? c.initial_state() : numbers("--z0", ia.z0);
    try {
      write_outputs(c, hs, run(c, hs, z0, t0, t1), ia.out, ia.plot_script);
    } catch (const IntegrationError& e) {
      std::cerr << integration_error(e).dump() << '\n';
      return kDomain;
    }
    return kOk;
  }

  // --sweep NAME=a:b:n over a parameter; z0 expressions are re-evaluated.
  const auto eq = ia.sweep.find('=');
  if (eq == std::string::npos) throw UsageError("--sweep expects NAME=a:b:n");
  const std::string name = ia.sweep.substr(0, eq);
  std::vector<std::string> parts;
  std::stringstream ss(ia.sweep.substr(eq + 1));
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 3) throw UsageError("--sweep expects NAME=a:b:n");
  const double a = number("--sweep", parts[0]);
  const double b = number("--sweep", parts[1]);
  const double nd = number("--sweep", parts[2]);
  if (nd < 1 || nd != std::floor(nd)) throw UsageError("--sweep count must be a positive integer");
  const auto count = static_cast<long>(nd);
  if (!ia.z0.empty()) throw UsageError("--sweep takes z0 from the model file");
  if (ia.out.empty() || ia.out == "-") throw UsageError("--sweep needs -o/--out as a file stem");
  if (!c.parameters.count(name)) throw UsageError("--sweep: unknown parameter '" + name + "'");

  const std::filesystem::path stem(ia.out);
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  std::vector<config::ModelConfig> cfgs(count, c);
  std::vector<std::string> files(count), plots(count);
  for (long i = 0; i < count; ++i) {
    cfgs[i].parameters[name] = count == 1 ? a : a + (b - a) * static_cast<double>(i) / (count - 1);
    auto f = stem;
    f.replace_filename(stem.stem().string() + "_" + std::to_string(i) +
                       (stem.has_extension() ? stem.extension().string() : ".csv"));
    files[i] = f.string();
    if (!ia.plot_script.empty()) {
      const std::filesystem::path ps(ia.plot_script);
      auto p = ps;
      p.replace_filename(ps.stem().string() + "_" + std::to_string(i) + ps.extension().string());
      plots[i] = p.string();
    }
  }
  std::vector<json> results(count);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    json r = {{"file", files[i]}, {name, cfgs[i].parameters[name]}};
    try {
      const auto hs = build_system(cfgs[i]);
      const auto traj = run(cfgs[i], hs, cfgs[i].initial_state(), t0, t1);
      write_outputs(cfgs[i], hs, traj, files[i], plots[i]);
      r["ok"] = true;
      r["t_end"] = traj.t_end();
    } catch (const IntegrationError& e) {
      r["ok"] = false;
      r["error"] = integration_error(e);
    } catch (const std::exception& e) {
      r["ok"] = false;
      r["error"] = e.what();
    }
    results[i] = std::move(r);
  }
  bool ok = true;
  for (const auto& r : results) {
    std::cout << r.dump() << '\n';
    ok = ok && r["ok"].get<bool>();
  }
  return ok ? kOk : kDomain;
}

// ---- check -------------------------------------------------------------------------

int cmd_check(const ModelArgs& args, std::size_t points, double tol, bool strict) {
  const auto c = load_model(args);
  json checks = json::array();
  auto add = [&](const std::string& name, bool pass, double value, double limit,
                 const std::string& note = {}) {
    json j = {{"name", name}, {"pass", pass}, {"max", value}, {"tol", limit}};
    if (!note.empty()) j["note"] = note;
    checks.push_back(j);
  };

  const auto sys = c.system();
  const auto closure = close_distribution(sys, c.samples(), c.closure);
  const double cr = closure.max_sample_residual();
  add("closure_residual", cr <= c.closure.closure_tol, cr, c.closure.closure_tol);

  const auto hs = HamiltonianSystem::build(sys, closure, hamiltonize_options(c));
  const auto items = par::identity_suite(hs, phase_points(c, hs.m_bar(), points));
  double jac = 0.0, drift = 0.0, anti = 0.0;
  std::string err;
  for (const auto& it : items) {
    if (!it.error.empty() && err.empty()) err = it.error;
    jac = std::max(jac, it.jacobi);
    drift = std::max(drift, it.drift);
    anti = std::max(anti, it.antisymmetry);
  }
  add("jacobi", err.empty() && jac <= tol, jac, tol, err);
  add("drift_compatibility", err.empty() && drift <= tol, drift, tol, err);
  add("antisymmetry", err.empty() && anti <= tol, anti, tol, err);

  // Hessian regularity over the samples and a few control values.
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& x : c.samples()) {
    for (double s : {0.0, 0.7, -1.3}) {
      std::vector<double> u(sys.m);
      for (std::size_t a = 0; a < sys.m; ++a) u[a] = s * (1.0 + 0.5 * static_cast<double>(a));
      worst = std::min(worst, std::fabs(hessian_determinant(sys, x, u)));
    }
  }
  add("hessian_regularity", worst > c.legendre.hessian_tol, worst, c.legendre.hessian_tol);

  bool all = true;
  for (const auto& ch : checks) all = all && ch["pass"].get<bool>();
  const json report = {{"model", c.name}, {"points", points}, {"pass", all}, {"checks", checks}};
  std::cout << report.dump(2) << '\n';
  return strict && !all ? kDomain : kOk;
}

// ---- classify ------------------------------------------------------------------------

struct ClassifyArgs {
  double m = 1.0, alpha = 1.0;
  std::string M, E, K, r, rdot, gamma, e, shape;
};

int cmd_classify(const ClassifyArgs& a, bool as_json) {
  central::Params P;
  P.m = a.m;
  P.alpha = a.alpha;
  if (a.M.empty()) throw UsageError("--M is required");
  const double M = number("--M", a.M);
  double E = 0.0, K = 0.0;
  if (!a.gamma.empty() || !a.e.empty()) {
    if (a.gamma.empty() || a.e.empty()) throw UsageError("--gamma and --e go together");
    const std::string shape = a.shape.empty() ? "PrecessingConic" : a.shape;
    std::optional<central::OrbitTag> tag;
    for (auto t : {central::OrbitTag::PrecessingConic, central::OrbitTag::BoundedFallSpiral,
                   central::OrbitTag::UnboundSpiralLow, central::OrbitTag::UnboundSpiralHigh}) {
      if (central::to_string(t) == shape) tag = t;
    }
    if (!tag) throw UsageError("--shape: unknown orbit shape '" + shape + "'");
    const auto k = central::constants_from_shape(*tag, number("--gamma", a.gamma),
                                                 number("--e", a.e), M, P);
    E = k.E;
    K = k.K;
  } else if (!a.r.empty()) {
    if (a.K.empty()) throw UsageError("--r needs --K");
    K = number("--K", a.K);
    E = central::energy(number("--r", a.r), a.rdot.empty() ? 0.0 : number("--rdot", a.rdot), M, K, P);
  } else {
    if (a.E.empty() || a.K.empty()) throw UsageError("give --E and --K, --r and --K, or --gamma and --e");
    E = number("--E", a.E);
    K = number("--K", a.K);
  }
  const auto cls = central::classify(P, M, E, K);
  const json report = {{"tag", central::to_string(cls.tag)},
                       {"gamma", cls.gamma},
                       {"e", cls.e},
                       {"p_latus", cls.p_latus},
                       {"delta", cls.delta},
                       {"M", M},
                       {"E", E},
                       {"K", K}};
  if (as_json) {
    std::cout << report.dump(2) << '\n';
  } else {
    std::cout << central::to_string(cls.tag) << " gamma=" << io::format_number(cls.gamma)
              << " e=" << io::format_number(cls.e) << " p=" << io::format_number(cls.p_latus)
              << " E=" << io::format_number(E) << " K=" << io::format_number(K) << '\n';
  }
  return kOk;
}

// ---- dof ------------------------------------------------------------------------------

int cmd_dof(const std::string& name, const std::string& file, bool as_json) {
  dof::InvolutiveTable t;
  if (!file.empty()) {
    try {
      t = dof::load_table(file);
    } catch (const dof::TableParseError& e) {
      throw UsageError(file + ": " + e.what());
    }
  } else if (!name.empty()) {
    try {
      t = dof::builtin(name);
    } catch (const std::out_of_range& e) {
      throw UsageError(e.what());
    }
  } else {
    throw UsageError("give a fixture name or --file");
  }
  t.validate();
  const long n = dof::dof(t);
  if (as_json) {
    std::cout << json{{"table", t.label}, {"dof", n}}.dump() << '\n';
  } else {
    std::cout << n << '\n';
  }
  return kOk;
}

// ---- compare-multiplier ----------------------------------------------------------------

struct CompareArgs {
  double m = 1.0, alpha = 1.0;
  std::string c = "0", r = "1", rdot = "0.1", M = "1.5", t1 = "20";
  std::string lambdadots = "10, 100, 1000";
};

int cmd_compare(const CompareArgs& a, const ModelArgs& tol, bool as_json) {
  central::Params P;
  P.m = a.m;
  P.alpha = a.alpha;
  const double c = number("--c", a.c);
  const double r = number("--r", a.r);
  const double rdot = number("--rdot", a.rdot);
  const double M = number("--M", a.M);
  const double t1 = number("--t1", a.t1);
  OdeOptions opts;
  opts.rtol = tol.rtol.value_or(1e-11);
  opts.atol = tol.atol.value_or(1e-13);
  const double K = c * M / (4.0 * P.m);

  const auto mult = integrate_ode(central::multiplier_rhs(P),
                                  central::multiplier_initial_state(r, rdot, 0.0, M, c, P), 0.0,
                                  t1, opts);
  const auto hs = central::hamiltonian_system(P);
  const auto part = integrate(hs, central::initial_state(r, rdot, 0.0, M, K, P), 0.0, t1, opts);

  double dk = 0.0;
  for (const auto& y : mult.states()) dk = std::max(dk, std::fabs(central::multiplier_K(P, y) - K));
  double dev = 0.0;
  const int grid = 2000;
  for (int i = 0; i <= grid; ++i) {
    const double t = t1 * i / grid;
    const auto ym = mult.state_at(t);
    const auto zp = part.state_at(t);
    dev = std::max({dev, std::fabs(ym[0] - zp[0]), std::fabs(ym[2] - zp[1])});
  }
  const double phidot = M / (P.m * r * r);
  json energies = json::array();
  for (double l : numbers("--lambdadot", a.lambdadots)) {
    energies.push_back({{"lambdadot", l}, {"E_lambda", central::multiplier_energy(P, r, rdot, phidot, l)}});
  }
  const json report = {{"c", c},
                       {"K", K},
                       {"max_K_deviation", dk},
                       {"max_r_phi_deviation", dev},
                       {"t1", t1},
                       {"energies", energies}};
  if (as_json) {
    std::cout << report.dump(2) << '\n';
  } else {
    std::cout << "K = " << io::format_number(K) << "\nmax |K(multiplier) - K| = " << io::format_number(dk)
              << "\nmax (r, phi) deviation = " << io::format_number(dev) << '\n';
    for (const auto& e : energies) {
      std::cout << "E_lambda(lambdadot=" << io::format_number(e["lambdadot"].get<double>())
                << ") = " << io::format_number(e["E_lambda"].get<double>()) << '\n';
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"partially Lagrangian systems: closure, brackets, integration, checks"};
  app.require_subcommand(1);
  app.fallthrough();
  bool as_json = false;
  app.add_flag("--json", as_json, "machine-readable output");

  ModelArgs closure_args, ham_args, int_args, check_args;
  auto* closure = app.add_subcommand("closure", "close the characteristic distribution");
  add_model_args(closure, closure_args);

  auto* ham = app.add_subcommand("hamiltonize", "Poisson bracket, drift and H at a phase point");
  add_model_args(ham, ham_args);
  std::string at;
  bool canonical = false;
  ham->add_option("--at", at, "phase point, comma-separated");
  ham->add_flag("--canonical", canonical, "rewrite a pure-gauge system in canonical momenta");

  auto* integ = app.add_subcommand("integrate", "integrate and write a trajectory CSV");
  add_model_args(integ, int_args);
  IntegrateArgs ia;
  integ->add_option("--z0", ia.z0, "initial phase point, comma-separated");
  integ->add_option("--t0", ia.t0, "start time");
  integ->add_option("--t1", ia.t1, "end time");
  integ->add_option("-o,--out", ia.out, "CSV path (default stdout)");
  integ->add_option("--plot-script", ia.plot_script, "also write a gnuplot script");
  integ->add_option("--sweep", ia.sweep, "NAME=a:b:n, one run per parameter value");

  auto* check = app.add_subcommand("check", "identity suite");
  add_model_args(check, check_args);
  std::size_t points = 50;
  double tol = 1e-8;
  bool strict = false;
  check->add_option("--points", points, "phase points")->check(CLI::PositiveNumber);
  check->add_option("--tol", tol, "tolerance for the bracket identities");
  check->add_flag("--strict", strict, "exit 1 when a check fails");

  auto* cls = app.add_subcommand("classify", "orbit class of the central field (U = -alpha/r)");
  ClassifyArgs ca;
  cls->add_option("--mass", ca.m, "mass m");
  cls->add_option("--alpha", ca.alpha, "coupling alpha");
  cls->add_option("--M", ca.M, "angular momentum");
  cls->add_option("--E", ca.E, "energy");
  cls->add_option("--K", ca.K, "precession parameter");
  cls->add_option("--r", ca.r, "radius, with --rdot and --K instead of --E");
  cls->add_option("--rdot", ca.rdot, "radial velocity");
  cls->add_option("--gamma", ca.gamma, "shape: gamma");
  cls->add_option("--e", ca.e, "shape: e");
  cls->add_option("--shape", ca.shape, "orbit shape for --gamma/--e (default PrecessingConic)");

  auto* dofc = app.add_subcommand("dof", "degree-of-freedom count of an involutive table");
  std::string dof_name, dof_file;
  dofc->add_option("name", dof_name, "fixture: cotton, einstein-linear, central-field, "
                                     "central-field-multiplier");
  dofc->add_option("-f,--file", dof_file, "table file")->excludes(dofc->get_option("name"));

  auto* cmp = app.add_subcommand("compare-multiplier",
                                 "multiplier formulation against the partially Lagrangian one");
  CompareArgs cm;
  ModelArgs cmp_tol;
  cmp->add_option("--mass", cm.m, "mass m");
  cmp->add_option("--alpha", cm.alpha, "coupling alpha");
  cmp->add_option("--c", cm.c, "c = m r^2 lambdadot");
  cmp->add_option("--r", cm.r, "initial radius");
  cmp->add_option("--rdot", cm.rdot, "initial radial velocity");
  cmp->add_option("--M", cm.M, "angular momentum");
  cmp->add_option("--t1", cm.t1, "end time");
  cmp->add_option("--lambdadot", cm.lambdadots, "lambdadot values for E_lambda");
  cmp->add_option("--rtol", cmp_tol.rtol, "integrator relative tolerance");
  cmp->add_option("--atol", cmp_tol.atol, "integrator absolute tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*closure) return cmd_closure(closure_args, as_json);
    if (*ham) return cmd_hamiltonize(ham_args, at, canonical, as_json);
    if (*integ) return cmd_integrate(int_args, ia);
    if (*check) return cmd_check(check_args, points, tol, strict);
    if (*cls) return cmd_classify(ca, as_json);
    if (*dofc) return cmd_dof(dof_name, dof_file, as_json);
    if (*cmp) return cmd_compare(cm, cmp_tol, as_json);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const config::ConfigError& e) {
    std::cerr << json{{"error", "config"}, {"where", e.where()}, {"message", e.what()}}.dump() << '\n';
    return kUsage;
  } catch (const DegenerateBasis& e) {
    std::cerr << json{{"error", "degenerate-basis"}, {"point", e.point()}, {"basis", e.basis()},
                      {"message", e.what()}}.dump()
              << '\n';
    return kDomain;
  } catch (const IntegrationError& e) {
    std::cerr << integration_error(e).dump() << '\n';
    return kDomain;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "domain"}, {"message", e.what()}}.dump() << '\n';
    return kDomain;
  }
  return kUsage;
}
