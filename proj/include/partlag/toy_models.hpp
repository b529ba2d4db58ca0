#pragma once

// Small models covering the closure regimes the central field does not:
// a pure-gauge free particle (in two frames) and a one-generator system whose
// drift brackets back into the generator.

#include "partlag/control_system.hpp"
#include "partlag/geometry.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace partlag::toy {

enum class Regime { Integrable, PureGauge, OneStepNonintegrable };
std::string to_string(Regime r);

struct PlanarParams {
  /// U(x1, x2); "0" gives straight-line motion.
  std::string potential = "k*(x1^2 + x2^2)/2";
  double k = 1.0;
};

/// n = m = 2, Z = identity, V = 0, L = (u1^2 + u2^2)/2 - U.
ControlSystem planar_free(const PlanarParams& params = {});

/// Same particle in the frame Z1 = (1, 0), Z2 = (0, 1 + x1^2), so the
/// generators do not commute: [Z1, Z2] = 2 x1/(1 + x1^2) Z2.
ControlSystem planar_twisted(const PlanarParams& params = {});

struct RotationParams {
  double w = 0.5;   // angular speed at the axis
  double k = 0.3;   // x1-dependent part of the angular speed
  double c = 0.2;   // climb along x3
  double g = 0.4;   // linear potential g x1
};

/// n = 3, m = 1. Z = (-x2, x1, 0), V = (w (1 + x1^2 + x2^2) + k x1) Z + (0, 0, c),
/// L = u1^2/2 - g x1. [Z, V] = -k x2 Z. Z vanishes on the x3 axis, so samples
/// stay off it.
ControlSystem rotation_drift(const RotationParams& params = {});

struct ToyEntry {
  std::string name;
  Regime regime;
  /// Builds the model from a parameter map; missing names take defaults.
  std::function<ControlSystem(const std::map<std::string, double>&)> make;
  std::map<std::string, double> defaults;
  /// Closure samples away from singular loci.
  std::vector<std::vector<double>> samples;
  std::string note;
};

/// planar-free, planar-twisted, rotation-drift and central-field with
/// default parameters.
const std::vector<ToyEntry>& registry();
/// Throws std::out_of_range for an unknown name.
const ToyEntry& lookup(const std::string& name);

/// Regime of a computed closure; any extension that is not pure gauge
/// reports OneStepNonintegrable, check one_step_pattern() for the exact shape.
Regime regime_of(const ClosureResult& closure);

}  // namespace partlag::toy
