#include "partlag/toy_models.hpp"

#include "partlag/central_field.hpp"

#include <stdexcept>

namespace partlag::toy {

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Integrable: return "integrable";
    case Regime::PureGauge: return "pure-gauge";
    case Regime::OneStepNonintegrable: return "one-step-nonintegrable";
  }
  return "?";
}

ControlSystem planar_free(const PlanarParams& params) {
  return make_control_system("planar-free", 2, 2, {{"1", "0"}, {"0", "1"}}, {"0", "0"},
                             "(u1^2 + u2^2)/2 - (" + params.potential + ")", {{"k", params.k}});
}

ControlSystem planar_twisted(const PlanarParams& params) {
  return make_control_system("planar-twisted", 2, 2, {{"1", "0"}, {"0", "1 + x1^2"}}, {"0", "0"},
                             "(u1^2 + (1 + x1^2)^2*u2^2)/2 - (" + params.potential + ")",
                             {{"k", params.k}});
}

ControlSystem rotation_drift(const RotationParams& params) {
  const std::string s = "(w*(1 + x1^2 + x2^2) + k*x1)";
  return make_control_system("rotation-drift", 3, 1, {{"-x2", "x1", "0"}},
                             {"-" + s + "*x2", s + "*x1", "c"}, "u1^2/2 - g*x1",
                             {{"w", params.w}, {"k", params.k}, {"c", params.c}, {"g", params.g}});
}

namespace {

double get(const std::map<std::string, double>& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

}  // namespace

const std::vector<ToyEntry>& registry() {
  static const std::vector<ToyEntry> entries = {
      {"planar-free", Regime::PureGauge,
       [](const std::map<std::string, double>& p) {
         PlanarParams pp;
         pp.k = get(p, "k", pp.k);
         return planar_free(pp);
       },
       {{"k", 1.0}},
       {{0.0, 0.0}, {1.0, -0.5}, {-2.0, 0.7}, {0.3, 2.2}},
       "particle in a harmonic well, identity frame"},
      {"planar-twisted", Regime::PureGauge,
       [](const std::map<std::string, double>& p) {
         PlanarParams pp;
         pp.k = get(p, "k", pp.k);
         return planar_twisted(pp);
       },
       {{"k", 1.0}},
       {{0.0, 0.0}, {1.0, -0.5}, {-2.0, 0.7}, {0.3, 2.2}},
       "same particle, non-commuting frame"},
      {"rotation-drift", Regime::Integrable,
       [](const std::map<std::string, double>& p) {
         RotationParams rp;
         rp.w = get(p, "w", rp.w);
         rp.k = get(p, "k", rp.k);
         rp.c = get(p, "c", rp.c);
         rp.g = get(p, "g", rp.g);
         return rotation_drift(rp);
       },
       {{"w", 0.5}, {"k", 0.3}, {"c", 0.2}, {"g", 0.4}},
       {{1.0, 0.0, 0.0}, {0.5, 1.2, -1.0}, {-1.5, 0.7, 2.0}, {0.8, -0.9, 0.4}},
       "rotation generator with a rotating drift; avoid the x3 axis"},
      {"central-field", Regime::OneStepNonintegrable,
       [](const std::map<std::string, double>& p) {
         central::Params cp;
         cp.m = get(p, "m", cp.m);
         cp.alpha = get(p, "alpha", cp.alpha);
         return central::model(cp);
       },
       {{"m", 1.0}, {"alpha", 1.0}},
       central::default_samples(), "Kepler problem with angular momentum as a constraint"},
  };
  return entries;
}

const ToyEntry& lookup(const std::string& name) {
  for (const auto& e : registry()) {
    if (e.name == name) return e;
  }
  throw std::out_of_range("unknown model '" + name + "'");
}

Regime regime_of(const ClosureResult& closure) {
  if (closure.pure_gauge()) return Regime::PureGauge;
  if (closure.m_bar() == closure.m()) return Regime::Integrable;
  return Regime::OneStepNonintegrable;
}

}  // namespace partlag::toy
