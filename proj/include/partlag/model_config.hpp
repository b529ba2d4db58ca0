#pragma once

// Model files: INI sections with `key = value` lines. The grammar is
// described in README.md. Expressions are quoted strings; vector values are
// comma-separated inside one string.

#include "partlag/control_system.hpp"
#include "partlag/dynamics.hpp"
#include "partlag/geometry.hpp"
#include "partlag/hamiltonize.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace partlag::config {

/// Parse or validation failure; `where` is "line N" or "[section] key".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string where, const std::string& message)
      : std::runtime_error(where + ": " + message), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

struct EventConfig {
  std::string name;
  std::string expression;  // over x1..xn, p1..pmbar
  int direction = 0;
  bool terminal = true;
};

struct ModelConfig {
  std::string name;
  /// Set when the model comes from the built-in registry; Z, V and L are then
  /// taken from there and only the remaining sections apply.
  std::string builtin;
  std::size_t n = 0;
  std::size_t m = 0;
  std::map<std::string, double> parameters;
  std::vector<std::vector<std::string>> z;
  std::vector<std::string> v;
  std::string lagrangian;

  std::vector<std::pair<double, double>> box;  // one interval per x
  std::size_t sample_count = 32;
  std::vector<std::string> singular;  // expressions in x that must not vanish on the box

  ClosureOptions closure;
  LegendreOptions legendre;
  /// Drop the momentum part of the phase drift (negative-control fixtures).
  bool zero_momentum_drift = false;
  OdeOptions ode;

  std::vector<EventConfig> events;
  std::vector<std::pair<std::string, std::string>> invariants;  // name, expression

  std::vector<std::string> z0;  // initial phase point, expressions in parameters
  double t0 = 0.0;
  double t1 = 10.0;

  ControlSystem system() const;
  /// Sobol points in the box; built-in models without a box use their
  /// registry samples.
  std::vector<std::vector<double>> samples() const;
  /// Throws ConfigError if a singular expression vanishes or changes sign on
  /// the samples or box corners.
  void check_singular_loci() const;

  std::vector<double> initial_state() const;
  std::vector<EventSpec> event_specs(std::size_t m_bar) const;
  std::vector<PhaseFunction> invariant_functions(std::size_t m_bar) const;
};

ModelConfig parse(const std::string& text);
ModelConfig load(const std::filesystem::path& path);
/// Model config for a registry entry with its default samples, tolerances,
/// invariants and events.
ModelConfig builtin(const std::string& name);

/// Split "a, b, c" at top-level commas.
std::vector<std::string> split_list(const std::string& s);

}  // namespace partlag::config
