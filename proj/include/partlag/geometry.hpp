#pragma once

// Vector fields on the state manifold, Lie brackets, and the closure of the
// characteristic distribution together with its pointwise structure functions:
//
//   [Z_a, Z_b] = U^c_ab Z_c,     [Z_a, V] = D^b_a Z_b.
//
// Bracket fields are evaluated exactly by nesting duals: a bracket evaluated on
// scalar T differentiates its operands on Dual<T>. Nesting stops at
// kMaxDualDepth; past that, plain-double evaluation falls back to central
// differences.

#include "partlag/autodiff.hpp"
#include "partlag/expr.hpp"
#include "partlag/linalg.hpp"

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace partlag {

class NestingDepthExceeded : public std::runtime_error {
 public:
  NestingDepthExceeded() : std::runtime_error("dual nesting depth exceeded") {}
};

class VectorField;

template <class T>
struct FieldJet {
  std::vector<T> value;
  Mat<T> jacobian;  // (i, j) = d_j X^i
};

class VectorField {
 public:
  enum class Origin { User, Bracket, DriftBracket };

  VectorField() = default;

  /// Components given as programs over the positional state variables.
  static VectorField from_programs(std::string label, std::vector<expr::Program> components);

  std::size_t dim() const { return impl_ ? impl_->dim : 0; }
  const std::string& label() const { return impl_->label; }
  Origin origin() const { return impl_->origin; }
  /// Basis indices of the bracket operands (bracket fields only).
  std::size_t left() const { return impl_->left; }
  std::size_t right() const { return impl_->right; }
  /// Bracket nesting: 0 for user fields, 1 + max(operands) for brackets.
  int nesting() const { return impl_->nesting; }
  bool valid() const noexcept { return static_cast<bool>(impl_); }

  template <class T>
  std::vector<T> eval(std::span<const T> x) const;

  std::vector<double> operator()(std::span<const double> x) const { return eval<double>(x); }

  friend VectorField lie_bracket(const VectorField& x, const VectorField& y, Origin origin,
                                 std::size_t left, std::size_t right);

 private:
  struct Impl {
    std::size_t dim = 0;
    std::string label;
    Origin origin = Origin::User;
    std::size_t left = 0;
    std::size_t right = 0;
    int nesting = 0;
    std::vector<expr::Program> components;
    std::shared_ptr<const Impl> x;
    std::shared_ptr<const Impl> y;
  };

  explicit VectorField(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  template <class T>
  static std::vector<T> eval_impl(const Impl& f, std::span<const T> x);
  template <class T>
  static FieldJet<T> jet_impl(const Impl& f, std::span<const T> x);
  static std::vector<double> bracket_fd(const Impl& f, std::span<const double> x);

  template <class T>
  friend FieldJet<T> jet(const VectorField& f, std::span<const T> x);

  std::shared_ptr<const Impl> impl_;
};

/// [X, Y]^i = X^j d_j Y^i - Y^j d_j X^i.
VectorField lie_bracket(const VectorField& x, const VectorField& y,
                        VectorField::Origin origin = VectorField::Origin::Bracket,
                        std::size_t left = 0, std::size_t right = 0);

/// Value and Jacobian of a field at x, both carried on T.
template <class T>
FieldJet<T> jet(const VectorField& f, std::span<const T> x) {
  return VectorField::jet_impl<T>(*f.impl_, x);
}

/// Bracket of two fields from their jets.
template <class T>
std::vector<T> bracket_from_jets(const FieldJet<T>& x, const FieldJet<T>& y) {
  const std::size_t n = x.value.size();
  std::vector<T> out(n, T(0.0));
  for (std::size_t i = 0; i < n; ++i) {
    T s(0.0);
    for (std::size_t j = 0; j < n; ++j) {
      s += x.value[j] * y.jacobian(i, j) - y.value[j] * x.jacobian(i, j);
    }
    out[i] = std::move(s);
  }
  return out;
}

template <class T>
FieldJet<T> VectorField::jet_impl(const Impl& f, std::span<const T> x) {
  if constexpr (dual_depth<T> < kMaxDualDepth) {
    const std::size_t n = x.size();
    std::vector<Dual<T>> xs;
    xs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) xs.push_back(Dual<T>::variable(x[i], i, n));
    std::vector<Dual<T>> v = eval_impl<Dual<T>>(f, std::span<const Dual<T>>(xs));
    FieldJet<T> out{std::vector<T>(n, T(0.0)), Mat<T>(n, n)};
    for (std::size_t i = 0; i < n; ++i) {
      out.value[i] = v[i].value();
      for (std::size_t j = 0; j < n; ++j) out.jacobian(i, j) = v[i].partial(j);
    }
    return out;
  } else {
    throw NestingDepthExceeded();
  }
}

template <class T>
std::vector<T> VectorField::eval_impl(const Impl& f, std::span<const T> x) {
  if (x.size() != f.dim) {
    throw std::invalid_argument("vector field '" + f.label + "' expects dimension " +
                                std::to_string(f.dim) + ", got " + std::to_string(x.size()));
  }
  if (!f.components.empty()) {
    std::vector<T> out;
    out.reserve(f.dim);
    for (const auto& c : f.components) out.push_back(c.template eval<T>(x));
    return out;
  }
  if constexpr (std::is_same_v<T, double>) {
    try {
      return bracket_from_jets(jet_impl<T>(*f.x, x), jet_impl<T>(*f.y, x));
    } catch (const NestingDepthExceeded&) {
      return bracket_fd(f, x);
    }
  } else {
    return bracket_from_jets(jet_impl<T>(*f.x, x), jet_impl<T>(*f.y, x));
  }
}

template <class T>
std::vector<T> VectorField::eval(std::span<const T> x) const {
  return eval_impl<T>(*impl_, x);
}

// ---- closure ----------------------------------------------------------------

struct ControlSystem;

struct ClosureOptions {
  double rank_tol = 1e-7;     // relative to the largest singular value
  double closure_tol = 1e-6;  // max unexplained commutator component
  std::size_t max_sweeps = 16;
};

/// Degenerate generator or basis matrix at a sample point.
class DegenerateBasis : public std::runtime_error {
 public:
  DegenerateBasis(std::vector<double> point, std::vector<std::string> basis, double ratio);
  const std::vector<double>& point() const noexcept { return point_; }
  const std::vector<std::string>& basis() const noexcept { return basis_; }
  double singular_ratio() const noexcept { return ratio_; }

 private:
  std::vector<double> point_;
  std::vector<std::string> basis_;
  double ratio_;
};

class ClosureNotConverged : public std::runtime_error {
 public:
  explicit ClosureNotConverged(std::vector<std::string> basis);
  const std::vector<std::string>& basis() const noexcept { return basis_; }

 private:
  std::vector<std::string> basis_;
};

template <class T>
struct StructureFunctions {
  std::size_t n = 0;
  std::size_t m_bar = 0;
  Mat<T> basis;                // n x m_bar, column a = Z_a(x)
  std::vector<T> u;            // u[(c * m_bar + a) * m_bar + b] = U^c_ab
  Mat<T> drift;                // (b, a) = D^b_a, [Z_a, V] = D^b_a Z_b
  std::vector<T> drift_value;  // V(x)
  double residual = 0.0;

  const T& U(std::size_t c, std::size_t a, std::size_t b) const {
    return u[(c * m_bar + a) * m_bar + b];
  }
  T& U(std::size_t c, std::size_t a, std::size_t b) { return u[(c * m_bar + a) * m_bar + b]; }
};

class ClosureResult {
 public:
  std::size_t n() const noexcept { return n_; }
  /// Number of original generators.
  std::size_t m() const noexcept { return m_; }
  std::size_t m_bar() const noexcept { return basis_.size(); }
  bool pure_gauge() const noexcept { return basis_.size() == n_; }
  const std::vector<VectorField>& basis() const noexcept { return basis_; }
  const VectorField& drift() const noexcept { return drift_; }
  const std::vector<std::vector<double>>& samples() const noexcept { return samples_; }
  const ClosureOptions& options() const noexcept { return options_; }
  std::size_t sweeps() const noexcept { return sweeps_; }

  /// Coefficients by least squares against the basis at x. The caller treats
  /// residual > closure_tol as "not closed here". Throws DegenerateBasis when
  /// the basis loses rank at x.
  template <class T>
  StructureFunctions<T> structure_functions_at(std::span<const T> x) const;

  /// Max structure residual over the closure's sample points.
  double max_sample_residual() const;

  /// True when the extension is exactly one drift bracket per generator,
  /// Z_{m+a} = [Z_a, V], with [Z_a, Z_b] inside span{Z_0..Z_{m-1}}.
  bool one_step_pattern() const;

 private:
  friend ClosureResult close_fields(const std::vector<VectorField>&, const VectorField&,
                                    const std::vector<std::vector<double>>&, const ClosureOptions&);
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<VectorField> basis_;
  VectorField drift_;
  std::vector<std::vector<double>> samples_;
  ClosureOptions options_;
  std::size_t sweeps_ = 0;
};

/// Iteratively bracket the basis with itself and with the drift until no
/// candidate leaves the span at any sample, or the span is the full tangent
/// space.
ClosureResult close_fields(const std::vector<VectorField>& generators, const VectorField& drift,
                           const std::vector<std::vector<double>>& samples,
                           const ClosureOptions& options = {});

ClosureResult close_distribution(const ControlSystem& sys,
                                 const std::vector<std::vector<double>>& samples,
                                 const ClosureOptions& options = {});

/// sigma_min / sigma_max of the matrix whose columns are `columns`.
double singular_ratio(const std::vector<std::vector<double>>& columns);

template <class T>
StructureFunctions<T> ClosureResult::structure_functions_at(std::span<const T> x) const {
  const std::size_t mb = basis_.size();
  StructureFunctions<T> sf;
  sf.n = n_;
  sf.m_bar = mb;
  std::vector<FieldJet<T>> jets;
  jets.reserve(mb);
  for (const auto& f : basis_) jets.push_back(jet<T>(f, x));
  FieldJet<T> vjet = jet<T>(drift_, x);

  sf.basis = Mat<T>(n_, mb);
  for (std::size_t a = 0; a < mb; ++a) {
    for (std::size_t i = 0; i < n_; ++i) sf.basis(i, a) = jets[a].value[i];
  }
  std::vector<double> px;
  for (const auto& v : x) px.push_back(scalar_value(v));
  std::unique_ptr<HouseholderQR<T>> qr;
  try {
    qr = std::make_unique<HouseholderQR<T>>(sf.basis, options_.rank_tol);
  } catch (const RankDeficient&) {
    std::vector<std::string> names;
    for (const auto& f : basis_) names.push_back(f.label());
    throw DegenerateBasis(px, names, 0.0);
  }
  sf.u.assign(mb * mb * mb, T(0.0));
  sf.drift = Mat<T>(mb, mb);
  double worst = 0.0;
  for (std::size_t a = 0; a < mb; ++a) {
    for (std::size_t b = a + 1; b < mb; ++b) {
      double r = 0.0;
      auto coeff = qr->solve(bracket_from_jets(jets[a], jets[b]), &r);
      worst = std::max(worst, r);
      for (std::size_t c = 0; c < mb; ++c) {
        sf.U(c, b, a) = -coeff[c];
        sf.U(c, a, b) = std::move(coeff[c]);
      }
    }
    double r = 0.0;
    auto coeff = qr->solve(bracket_from_jets(jets[a], vjet), &r);
    worst = std::max(worst, r);
    for (std::size_t b = 0; b < mb; ++b) sf.drift(b, a) = std::move(coeff[b]);
  }
  sf.drift_value = std::move(vjet.value);
  sf.residual = worst;
  return sf;
}

}  // namespace partlag
