#pragma once

// Forward-mode automatic differentiation.
//
// Dual<T> carries a value and a dense vector of partial derivatives. T may be
// double or another Dual, so nesting Dual<Dual<double>> yields exact second
// derivatives, and so on. Partials are stored inline for the small state
// dimensions used here; an empty partial vector means "all zero" so constants
// cost nothing.

#include <boost/container/small_vector.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace partlag {

/// Raised when an elementary function is evaluated outside its domain.
class DomainError : public std::runtime_error {
 public:
  DomainError(std::string operation, double value, std::string context = {})
      : std::runtime_error(format(operation, value, context)),
        operation_(std::move(operation)),
        value_(value),
        context_(std::move(context)) {}

  const std::string& operation() const noexcept { return operation_; }
  double value() const noexcept { return value_; }
  const std::string& context() const noexcept { return context_; }

  DomainError with_context(const std::string& ctx) const {
    return DomainError(operation_, value_, context_.empty() ? ctx : ctx + ": " + context_);
  }

 private:
  static std::string format(const std::string& op, double v, const std::string& ctx) {
    std::ostringstream os;
    os.precision(17);
    os << "domain violation in " << op << " at value " << v;
    if (!ctx.empty()) os << " (" << ctx << ")";
    return os.str();
  }

  std::string operation_;
  double value_;
  std::string context_;
};


template <class T>
class Dual;

namespace ad {
inline double div(double a, double b);
template <class T>
Dual<T> div(const Dual<T>& a, const Dual<T>& b);
}  // namespace ad

template <class T>
struct dual_traits {
  static constexpr int depth = 0;
};
template <class T>
struct dual_traits<Dual<T>> {
  static constexpr int depth = 1 + dual_traits<T>::depth;
};

/// Nesting depth: 0 for double, 1 for Dual<double>, ...
template <class T>
inline constexpr int dual_depth = dual_traits<T>::depth;

/// Inline partial capacity: generous for first-order duals, small for nested
/// ones whose elements are themselves large.
template <class T>
inline constexpr std::size_t kInlinePartials = dual_depth<T> == 0 ? 6 : 2;

template <class T>
class Dual {
 public:
  using value_type = T;
  using Partials = boost::container::small_vector<T, kInlinePartials<T>>;

  Dual() : value_(0.0) {}
  template <class S>
    requires std::is_arithmetic_v<S>
  Dual(S c) : value_(static_cast<double>(c)) {}  // NOLINT: implicit constant lift
  Dual(T v, Partials d) : value_(std::move(v)), partials_(std::move(d)) {}

  /// Variable with unit partial at `index` among `count` active variables.
  static Dual variable(T v, std::size_t index, std::size_t count) {
    Partials d(count, T(0.0));
    d[index] = T(1.0);
    return Dual(std::move(v), std::move(d));
  }

  const T& value() const noexcept { return value_; }
  T& value() noexcept { return value_; }
  const Partials& partials() const noexcept { return partials_; }
  Partials& partials() noexcept { return partials_; }
  std::size_t size() const noexcept { return partials_.size(); }

  /// Partial i, zero when the partial vector is shorter (constants).
  T partial(std::size_t i) const { return i < partials_.size() ? partials_[i] : T(0.0); }

  Dual operator-() const {
    Partials d(partials_.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = -partials_[i];
    return Dual(-value_, std::move(d));
  }

  Dual& operator+=(const Dual& o) {
    value_ += o.value_;
    grow(o.size());
    for (std::size_t i = 0; i < o.size(); ++i) partials_[i] += o.partials_[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    value_ -= o.value_;
    grow(o.size());
    for (std::size_t i = 0; i < o.size(); ++i) partials_[i] -= o.partials_[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) { return *this = *this * o; }
  Dual& operator/=(const Dual& o) { return *this = *this / o; }

  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }

  friend Dual operator*(const Dual& a, const Dual& b) {
    const std::size_t n = std::max(a.size(), b.size());
    Partials d(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (i < a.size() && i < b.size()) {
        d[i] = a.partials_[i] * b.value_ + a.value_ * b.partials_[i];
      } else if (i < a.size()) {
        d[i] = a.partials_[i] * b.value_;
      } else {
        d[i] = a.value_ * b.partials_[i];
      }
    }
    return Dual(a.value_ * b.value_, std::move(d));
  }

  friend Dual operator/(const Dual& a, const Dual& b) {
    T v = ad::div(a.value_, b.value_);
    const std::size_t n = std::max(a.size(), b.size());
    Partials d(n);
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = (a.partial(i) - v * b.partial(i)) / b.value_;
    }
    return Dual(std::move(v), std::move(d));
  }

 private:
  void grow(std::size_t n) {
    if (partials_.size() < n) partials_.resize(n, T(0.0));
  }

  T value_;
  Partials partials_;
};

/// Innermost real value of a possibly nested dual.
inline double scalar_value(double x) noexcept { return x; }
template <class T>
double scalar_value(const Dual<T>& x) noexcept {
  return scalar_value(x.value());
}

/// True when every partial at every nesting level is zero.
inline bool is_constant(double) noexcept { return true; }
template <class T>
bool is_constant(const Dual<T>& x) noexcept {
  if (!is_constant(x.value())) return false;
  for (const auto& p : x.partials()) {
    if (scalar_value(p) != 0.0 || !is_constant(p)) return false;
  }
  return true;
}

// ---- elementary functions -------------------------------------------------
//
// Each function checks its domain on the real value and throws DomainError;
// the same overload set serves double and every Dual level.

namespace ad {

inline double div(double a, double b) {
  if (b == 0.0) throw DomainError("div", b);
  return a / b;
}
inline double sqrt(double x) {
  if (!(x >= 0.0)) throw DomainError("sqrt", x);
  return std::sqrt(x);
}
inline double exp(double x) { return std::exp(x); }
inline double log(double x) {
  if (!(x > 0.0)) throw DomainError("log", x);
  return std::log(x);
}
inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double abs(double x) { return std::fabs(x); }

template <class T> Dual<T> sqrt(const Dual<T>& x);
template <class T> Dual<T> exp(const Dual<T>& x);
template <class T> Dual<T> log(const Dual<T>& x);
template <class T> Dual<T> sin(const Dual<T>& x);
template <class T> Dual<T> cos(const Dual<T>& x);
template <class T> Dual<T> abs(const Dual<T>& x);
template <class T> Dual<T> ipow(const Dual<T>& x, long k);

template <class T>
Dual<T> div(const Dual<T>& a, const Dual<T>& b) {
  return a / b;
}

template <class T>
Dual<T> sqrt(const Dual<T>& x) {
  if (!(scalar_value(x) > 0.0)) {
    if (scalar_value(x) == 0.0 && is_constant(x)) {
      return Dual<T>(T(0.0), typename Dual<T>::Partials(x.size(), T(0.0)));
    }
    throw DomainError("sqrt", scalar_value(x));
  }
  T s = ad::sqrt(x.value());
  typename Dual<T>::Partials d(x.size());
  if (x.size() > 0) {
    T inv = ad::div(T(0.5), s);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = x.partials()[i] * inv;
  }
  return Dual<T>(std::move(s), std::move(d));
}

template <class T>
Dual<T> exp(const Dual<T>& x) {
  T e = ad::exp(x.value());
  typename Dual<T>::Partials d(x.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = x.partials()[i] * e;
  return Dual<T>(std::move(e), std::move(d));
}

template <class T>
Dual<T> log(const Dual<T>& x) {
  if (!(scalar_value(x) > 0.0)) throw DomainError("log", scalar_value(x));
  T l = ad::log(x.value());
  typename Dual<T>::Partials d(x.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = x.partials()[i] / x.value();
  return Dual<T>(std::move(l), std::move(d));
}

template <class T>
Dual<T> sin(const Dual<T>& x) {
  T c = ad::cos(x.value());
  typename Dual<T>::Partials d(x.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = x.partials()[i] * c;
  return Dual<T>(ad::sin(x.value()), std::move(d));
}

template <class T>
Dual<T> cos(const Dual<T>& x) {
  T s = ad::sin(x.value());
  typename Dual<T>::Partials d(x.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = -(x.partials()[i] * s);
  return Dual<T>(ad::cos(x.value()), std::move(d));
}

template <class T>
Dual<T> abs(const Dual<T>& x) {
  const double v = scalar_value(x);
  if (v < 0.0) return -x;
  if (v > 0.0) return x;
  return Dual<T>(ad::abs(x.value()), typename Dual<T>::Partials(x.size(), T(0.0)));
}

/// Integer power by repeated squaring; negative exponents invert.
template <class T>
T ipow(const T& base, long k) {
  if (k < 0) return ad::div(T(1.0), ipow(base, -k));
  T result(1.0);
  T b = base;
  while (k > 0) {
    if (k & 1) result = result * b;
    k >>= 1;
    if (k > 0) b = b * b;
  }
  return result;
}

/// Dual power by the chain rule: one scalar power per nesting level.
template <class T>
Dual<T> ipow(const Dual<T>& x, long k) {
  if (k == 0) return Dual<T>(1.0);
  if (k < 0) return ad::div(Dual<T>(1.0), ipow(x, -k));
  T lower = ipow(x.value(), k - 1);
  T value = lower * x.value();
  typename Dual<T>::Partials d(x.size());
  if (x.size() > 0) {
    T scale = lower * T(static_cast<double>(k));
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = x.partials()[i] * scale;
  }
  return Dual<T>(std::move(value), std::move(d));
}

/// General power. Integer-valued constant exponents use ipow; anything else
/// requires a positive base.
template <class T>
T pow(const T& base, const T& exponent) {
  const double e = scalar_value(exponent);
  if (is_constant(exponent) && std::nearbyint(e) == e && std::fabs(e) <= 1024.0) {
    return ipow(base, static_cast<long>(e));
  }
  if (!(scalar_value(base) > 0.0)) throw DomainError("pow", scalar_value(base));
  return ad::exp(exponent * ad::log(base));
}

}  // namespace ad

// ---- seeding --------------------------------------------------------------

/// Lift a point into duals: identity partials on the active indices (in the
/// order given), zero partials elsewhere.
template <class T = double>
std::vector<Dual<T>> seed(std::span<const T> point, std::span<const std::size_t> active) {
  const std::size_t k = active.size();
  std::vector<Dual<T>> out;
  out.reserve(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) {
    out.emplace_back(point[i], typename Dual<T>::Partials(k, T(0.0)));
  }
  for (std::size_t a = 0; a < k; ++a) {
    if (active[a] >= point.size()) {
      throw std::out_of_range("seed: active index " + std::to_string(active[a]) +
                              " out of range for dimension " + std::to_string(point.size()));
    }
    out[active[a]].partials()[a] = T(1.0);
  }
  return out;
}

/// Seed every coordinate.
template <class T = double>
std::vector<Dual<T>> seed_all(std::span<const T> point) {
  std::vector<Dual<T>> out;
  out.reserve(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) {
    out.push_back(Dual<T>::variable(point[i], i, point.size()));
  }
  return out;
}

using D1 = Dual<double>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;
using D4 = Dual<D3>;

/// Deepest nesting the vector-field machinery instantiates.
inline constexpr int kMaxDualDepth = 4;

}  // namespace partlag
