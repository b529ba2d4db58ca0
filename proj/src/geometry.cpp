#include "partlag/geometry.hpp"

#include "partlag/control_system.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace partlag {

VectorField VectorField::from_programs(std::string label, std::vector<expr::Program> components) {
  if (components.empty()) throw std::invalid_argument("vector field '" + label + "' has no components");
  auto impl = std::make_shared<Impl>();
  impl->dim = components.size();
  for (const auto& c : components) {
    if (c.arity() > impl->dim) {
      throw std::invalid_argument("vector field '" + label + "': component arity " +
                                  std::to_string(c.arity()) + " exceeds dimension");
    }
  }
  impl->label = std::move(label);
  impl->components = std::move(components);
  return VectorField(std::move(impl));
}

VectorField lie_bracket(const VectorField& x, const VectorField& y, VectorField::Origin origin,
                        std::size_t left, std::size_t right) {
  if (!x.valid() || !y.valid()) throw std::invalid_argument("lie_bracket of an empty field");
  if (x.dim() != y.dim()) {
    throw std::invalid_argument("lie_bracket dimension mismatch: " + std::to_string(x.dim()) +
                                " vs " + std::to_string(y.dim()));
  }
  auto impl = std::make_shared<VectorField::Impl>();
  impl->dim = x.dim();
  impl->label = "[" + x.label() + "," + y.label() + "]";
  impl->origin = origin;
  impl->left = left;
  impl->right = right;
  impl->nesting = 1 + std::max(x.nesting(), y.nesting());
  impl->x = x.impl_;
  impl->y = y.impl_;
  return VectorField(std::move(impl));
}

std::vector<double> VectorField::bracket_fd(const Impl& f, std::span<const double> x) {
  const std::size_t n = x.size();
  double norm = 0.0;
  for (double v : x) norm += v * v;
  const double h = 1e-5 * std::max(1.0, std::sqrt(norm));
  auto jacobian = [&](const Impl& g) {
    Mat<double> j(n, n);
    std::vector<double> xp(x.begin(), x.end());
    for (std::size_t k = 0; k < n; ++k) {
      const double x0 = xp[k];
      xp[k] = x0 + h;
      auto plus = eval_impl<double>(g, xp);
      xp[k] = x0 - h;
      auto minus = eval_impl<double>(g, xp);
      xp[k] = x0;
      for (std::size_t i = 0; i < n; ++i) j(i, k) = (plus[i] - minus[i]) / (2.0 * h);
    }
    return j;
  };
  FieldJet<double> jx{eval_impl<double>(*f.x, x), jacobian(*f.x)};
  FieldJet<double> jy{eval_impl<double>(*f.y, x), jacobian(*f.y)};
  return bracket_from_jets(jx, jy);
}

namespace {

std::string format_point(const std::vector<double>& p) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ")";
  return os.str();
}

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) out += (i ? ", " : "") + names[i];
  return out;
}

std::vector<std::string> labels(const std::vector<VectorField>& basis) {
  std::vector<std::string> out;
  for (const auto& f : basis) out.push_back(f.label());
  return out;
}

}  // namespace

DegenerateBasis::DegenerateBasis(std::vector<double> point, std::vector<std::string> basis,
                                 double ratio)
    : std::runtime_error("basis {" + join(basis) + "} is degenerate at x = " + format_point(point)),
      point_(std::move(point)),
      basis_(std::move(basis)),
      ratio_(ratio) {}

ClosureNotConverged::ClosureNotConverged(std::vector<std::string> basis)
    : std::runtime_error("closure did not stabilize; current basis {" + join(basis) + "}"),
      basis_(std::move(basis)) {}

double singular_ratio(const std::vector<std::vector<double>>& columns) {
  if (columns.empty()) return 0.0;
  const auto rows = static_cast<Eigen::Index>(columns.front().size());
  Eigen::MatrixXd a(rows, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) a(i, static_cast<Eigen::Index>(j)) = columns[j][i];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() < static_cast<Eigen::Index>(columns.size())) return 0.0;  // more columns than rows
  const double smax = s(0);
  if (!(smax > 0.0)) return 0.0;
  return s(s.size() - 1) / smax;
}

ClosureResult close_fields(const std::vector<VectorField>& generators, const VectorField& drift,
                           const std::vector<std::vector<double>>& samples,
                           const ClosureOptions& options) {
  if (generators.empty()) throw std::invalid_argument("closure needs at least one generator");
  if (samples.empty()) throw std::invalid_argument("closure needs at least one sample point");
  const std::size_t n = generators.front().dim();
  for (const auto& g : generators) {
    if (g.dim() != n) throw std::invalid_argument("generator dimensions differ");
  }
  if (drift.dim() != n) throw std::invalid_argument("drift dimension differs from generators");
  for (const auto& s : samples) {
    if (s.size() != n) throw std::invalid_argument("sample point of wrong dimension");
  }

  ClosureResult out;
  out.n_ = n;
  out.m_ = generators.size();
  out.basis_ = generators;
  out.drift_ = drift;
  out.samples_ = samples;
  out.options_ = options;

  // values[s][a] = Z_a(sample s)
  std::vector<std::vector<std::vector<double>>> values(samples.size());
  for (std::size_t s = 0; s < samples.size(); ++s) {
    for (const auto& g : generators) values[s].push_back(g(samples[s]));
    const double r = singular_ratio(values[s]);
    if (!(r > options.rank_tol)) throw DegenerateBasis(samples[s], labels(out.basis_), r);
  }

  auto joins = [&](const std::vector<std::vector<double>>& w) {
    for (std::size_t s = 0; s < samples.size(); ++s) {
      auto cols = values[s];
      cols.push_back(w[s]);
      if (singular_ratio(cols) > options.rank_tol) return true;
    }
    return false;
  };
  auto try_add = [&](VectorField cand) {
    std::vector<std::vector<double>> w;
    w.reserve(samples.size());
    for (const auto& s : samples) w.push_back(cand(s));
    if (!joins(w)) return false;
    out.basis_.push_back(std::move(cand));
    for (std::size_t s = 0; s < samples.size(); ++s) values[s].push_back(std::move(w[s]));
    return true;
  };

  std::size_t examined = 0;
  bool stable = false;
  for (std::size_t sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    out.sweeps_ = sweep;
    const std::size_t snap = out.basis_.size();
    bool added = false;
    for (std::size_t i = 0; i < snap && out.basis_.size() < n; ++i) {
      for (std::size_t j = std::max(i + 1, examined); j < snap && out.basis_.size() < n; ++j) {
        added |= try_add(lie_bracket(out.basis_[i], out.basis_[j], VectorField::Origin::Bracket, i, j));
      }
    }
    for (std::size_t i = examined; i < snap && out.basis_.size() < n; ++i) {
      added |= try_add(lie_bracket(out.basis_[i], drift, VectorField::Origin::DriftBracket, i, 0));
    }
    examined = snap;
    if (!added || out.basis_.size() == n) {
      stable = true;
      break;
    }
  }
  if (!stable) throw ClosureNotConverged(labels(out.basis_));

  for (std::size_t s = 0; s < samples.size(); ++s) {
    const double r = singular_ratio(values[s]);
    if (!(r > options.rank_tol)) throw DegenerateBasis(samples[s], labels(out.basis_), r);
  }
  return out;
}

ClosureResult close_distribution(const ControlSystem& sys,
                                 const std::vector<std::vector<double>>& samples,
                                 const ClosureOptions& options) {
  return close_fields(sys.generators, sys.drift, samples, options);
}

double ClosureResult::max_sample_residual() const {
  double worst = 0.0;
  for (const auto& s : samples_) {
    worst = std::max(worst, structure_functions_at<double>(std::span<const double>(s)).residual);
  }
  return worst;
}

bool ClosureResult::one_step_pattern() const {
  if (basis_.size() == m_) return false;
  std::vector<bool> used(m_, false);
  for (std::size_t a = m_; a < basis_.size(); ++a) {
    const auto& f = basis_[a];
    if (f.origin() != VectorField::Origin::DriftBracket || f.left() >= m_ || used[f.left()]) {
      return false;
    }
    used[f.left()] = true;
  }
  return true;
}

}  // namespace partlag
