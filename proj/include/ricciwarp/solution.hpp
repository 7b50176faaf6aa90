#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ricciwarp/ode_core.hpp"
#include "ricciwarp/profile.hpp"
#include "ricciwarp/regularity.hpp"
#include "ricciwarp/ricci_oracle.hpp"
#include "ricciwarp/tensor.hpp"

namespace ricciwarp {

struct ContinuationRecord {
  double c1 = 0.0;
  double c2 = 0.0;
  double gamma = 0.0;
  double end_t = 0.0;
  double res_bc = 0.0;
  double res_sup = 0.0;
  double z1_end = 0.0;
};

/// Sign and growth monitors over the checkpoints of an accepted half trajectory.
struct InvariantReport {
  double max_dy1 = 0.0;
  double max_dy2 = 0.0;
  double max_trace = 0.0;     // d1 dy1 + d2 dy2 for t > 1/2 + 1e-3
  double max_by1d = 0.0;      // -(1 - t) dy1
  bool pass = false;
};

InvariantReport monitor_invariants(const Trajectory& traj, int d1, int d2, double sign_tol = 1e-10,
                                   double delta = 0.5);

struct AssemblyOptions {
  RegularityTolerances regularity;
  ResidualWindow residual_window{1e-3, 1.0 - 1e-3};
  double residual_tol = 1e-6;
};

struct ScalingSolution {
  std::string method;  // "hamilton" or "general"
  double c1 = 0.0;
  double c2 = 0.0;
  double gamma = 0.0;
  double a = 0.0;
  double S = 0.0;
  double c1_lower = 0.0;  // largest c1 found infeasible
  MetricProfile profile;  // on [0, 1], even about 1/2
  Trajectory trajectory;  // half trajectory the profile was built from
  ResidualReport residuals;
  RegularityReport regularity;
  std::vector<ContinuationRecord> continuation;
  InvariantReport invariants;
  bool residuals_pass = false;

  bool pass() const { return residuals_pass && regularity.pass; }
};

/// Grid profile on [0, 1] from the half trajectory; points beyond the last checkpoint and t = 1
/// come from the tail model.
/// `end` overrides the model values (h, f1, f2) at t = 1 when it is known exactly.
MetricProfile assemble_profile(const Trajectory& traj, const RegularityReport& reg, int grid_n,
                               const std::optional<std::array<double, 3>>& end = std::nullopt);

/// Regularity, extension to t = 1, mirroring and the oracle report.
ScalingSolution assemble_full_solution(double c1, double c2, double gamma, double a, double S,
                                       Trajectory traj, const PrescribedTensor& T, int grid_n,
                                       const AssemblyOptions& options = {},
                                       const std::optional<std::array<double, 3>>& end = std::nullopt);

}  // namespace ricciwarp
