#pragma once

// Normal-form constraint data: xdot = Z_a(x) u^a + V(x), action integrand L(x, u).

#include "partlag/expr.hpp"
#include "partlag/geometry.hpp"

#include <boost/container/small_vector.hpp>

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace partlag {

struct ControlSystem {
  std::string name;
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<VectorField> generators;
  VectorField drift;
  /// L over the slots x1..xn, u1..um.
  expr::Program lagrangian;
  std::map<std::string, double> parameters;
  /// Box for the coarse-grid Newton fallback seed, one interval per control.
  std::vector<std::pair<double, double>> control_box;

  template <class T>
  T L(std::span<const T> x, std::span<const T> u) const {
    boost::container::small_vector<T, 8> args(x.begin(), x.end());
    args.insert(args.end(), u.begin(), u.end());
    return lagrangian.eval<T>(std::span<const T>(args.data(), args.size()));
  }
};

/// Build from expression strings. `z` holds m lists of n component strings.
/// Variables are x1..xn in Z and V, x1..xn and u1..um in L.
ControlSystem make_control_system(const std::string& name, std::size_t n, std::size_t m,
                                  const std::vector<std::vector<std::string>>& z,
                                  const std::vector<std::string>& v, const std::string& lagrangian,
                                  const std::map<std::string, double>& parameters);

}  // namespace partlag
