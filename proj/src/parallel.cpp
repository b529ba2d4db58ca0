#include "partlag/parallel.hpp"

#include <omp.h>

namespace partlag::par {

namespace {

IntegrationItem integrate_one(const HamiltonianSystem& hs, const std::vector<double>& z0, double t0,
                              double t1, const OdeOptions& opts,
                              const std::vector<EventSpec>& events,
                              const std::vector<Observable>& ledger) {
  IntegrationItem item;
  try {
    item.trajectory = integrate(hs, z0, t0, t1, opts, events, ledger);
  } catch (const std::exception& e) {
    item.error = e.what();
  }
  return item;
}

IdentityItem identities_one(const HamiltonianSystem& hs, const std::vector<double>& z) {
  IdentityItem item;
  try {
    item.jacobi = jacobi_residual(hs, z);
    item.drift = drift_compatibility(hs, z);
    item.antisymmetry = antisymmetry_residual(hs, z);
  } catch (const std::exception& e) {
    item.error = e.what();
  }
  return item;
}

double residual_one(const HamiltonianSystem& hs, const Trajectory& traj,
                    const ResidualOptions& opts) {
  return conditional_residual(hs, traj, opts).max_abs;
}

}  // namespace

int max_threads() { return omp_get_max_threads(); }

std::vector<IntegrationItem> integrate_batch(const HamiltonianSystem& hs,
                                             const std::vector<std::vector<double>>& initial,
                                             double t0, double t1, const OdeOptions& opts,
                                             const std::vector<EventSpec>& events,
                                             const std::vector<Observable>& ledger) {
  const auto count = static_cast<long>(initial.size());
  std::vector<IntegrationItem> out(initial.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) out[i] = integrate_one(hs, initial[i], t0, t1, opts, events, ledger);
  return out;
}

std::vector<IntegrationItem> integrate_batch_serial(const HamiltonianSystem& hs,
                                                    const std::vector<std::vector<double>>& initial,
                                                    double t0, double t1, const OdeOptions& opts,
                                                    const std::vector<EventSpec>& events,
                                                    const std::vector<Observable>& ledger) {
  std::vector<IntegrationItem> out;
  out.reserve(initial.size());
  for (const auto& z0 : initial) out.push_back(integrate_one(hs, z0, t0, t1, opts, events, ledger));
  return out;
}

std::vector<IdentityItem> identity_suite(const HamiltonianSystem& hs,
                                         const std::vector<std::vector<double>>& points) {
  const auto count = static_cast<long>(points.size());
  std::vector<IdentityItem> out(points.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) out[i] = identities_one(hs, points[i]);
  return out;
}

std::vector<IdentityItem> identity_suite_serial(const HamiltonianSystem& hs,
                                                const std::vector<std::vector<double>>& points) {
  std::vector<IdentityItem> out;
  out.reserve(points.size());
  for (const auto& z : points) out.push_back(identities_one(hs, z));
  return out;
}

std::vector<double> residual_batch(const HamiltonianSystem& hs,
                                   const std::vector<const Trajectory*>& trajectories,
                                   const ResidualOptions& opts) {
  const auto count = static_cast<long>(trajectories.size());
  std::vector<double> out(trajectories.size(), 0.0);
  std::vector<std::string> errors(trajectories.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    try {
      out[i] = residual_one(hs, *trajectories[i], opts);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw std::runtime_error(e);
  }
  return out;
}

std::vector<double> residual_batch_serial(const HamiltonianSystem& hs,
                                          const std::vector<const Trajectory*>& trajectories,
                                          const ResidualOptions& opts) {
  std::vector<double> out;
  out.reserve(trajectories.size());
  for (const auto* t : trajectories) out.push_back(residual_one(hs, *t, opts));
  return out;
}

}  // namespace partlag::par
