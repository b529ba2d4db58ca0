#pragma once

// Batch kernels over independent work items, OpenMP-parallel, each with a
// serial reference that must produce identical results.

#include "partlag/dynamics.hpp"
#include "partlag/hamiltonize.hpp"

#include <optional>
#include <string>
#include <vector>

namespace partlag::par {

/// Outcome of one item; exactly one of `trajectory` / `error` is set.
struct IntegrationItem {
  std::optional<Trajectory> trajectory;
  std::string error;
};

struct IdentityItem {
  double jacobi = 0.0;
  double drift = 0.0;
  double antisymmetry = 0.0;
  std::string error;
};

int max_threads();

std::vector<IntegrationItem> integrate_batch(const HamiltonianSystem& hs,
                                             const std::vector<std::vector<double>>& initial,
                                             double t0, double t1, const OdeOptions& opts = {},
                                             const std::vector<EventSpec>& events = {},
                                             const std::vector<Observable>& ledger = {});
std::vector<IntegrationItem> integrate_batch_serial(const HamiltonianSystem& hs,
                                                    const std::vector<std::vector<double>>& initial,
                                                    double t0, double t1,
                                                    const OdeOptions& opts = {},
                                                    const std::vector<EventSpec>& events = {},
                                                    const std::vector<Observable>& ledger = {});

/// Jacobi, drift-compatibility and antisymmetry residuals per phase point.
std::vector<IdentityItem> identity_suite(const HamiltonianSystem& hs,
                                         const std::vector<std::vector<double>>& points);
std::vector<IdentityItem> identity_suite_serial(const HamiltonianSystem& hs,
                                                const std::vector<std::vector<double>>& points);

/// Max conditional residual per trajectory.
std::vector<double> residual_batch(const HamiltonianSystem& hs,
                                   const std::vector<const Trajectory*>& trajectories,
                                   const ResidualOptions& opts = {});
std::vector<double> residual_batch_serial(const HamiltonianSystem& hs,
                                          const std::vector<const Trajectory*>& trajectories,
                                          const ResidualOptions& opts = {});

}  // namespace partlag::par
