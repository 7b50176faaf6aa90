#pragma once

#include <string>
#include <vector>

#include "ricciwarp/ode_core.hpp"
#include "ricciwarp/profile.hpp"
#include "ricciwarp/endgame.hpp"
#include "ricciwarp/solution.hpp"
#include "ricciwarp/tensor.hpp"

namespace ricciwarp {

/// l-formulation state; rho = sqrt(R) with R = c1 T1 + (d1 - 1)(l^2 - 1), y1 = ln(f1 / f1(1/2)).
struct LSample {
  double t = 0.5;
  double l = 0.0;
  double rho = 0.0;
  double y1 = 0.0;
  double radicand() const { return rho * rho; }
};

enum class LStatus { ReachedEnd, RadicandNegative };

struct LTrajectory {
  std::vector<LSample> samples;
  LStatus status = LStatus::ReachedEnd;
  double t_star = 1.0;  // where the radicand fell below the floor
  double c1 = 0.0;
  bool reached_end() const { return status == LStatus::ReachedEnd; }
};

struct HamiltonControls {
  IntegrationControls integration;
  double delta = 1e-6;       // feasibility probe ends at 1 - delta
  double radicand_floor = 1e-12;
  double tol_c1 = 1e-13;     // relative bisection width
  int max_doublings = 40;
};

LTrajectory solve_l(double c1, const PrescribedTensor& T, const HamiltonControls& controls = {});

struct C1HatResult {
  double c1_hat = 0.0;     // feasible endpoint of the final bracket
  double lower = 0.0;      // infeasible endpoint
  int iterations = 0;
  LTrajectory trajectory;  // at c1_hat
};

C1HatResult find_c1_hat(const PrescribedTensor& T, const HamiltonControls& controls = {});

/// Bisection core without the tensor hypotheses check.
C1HatResult bisect_c1_hat(const PrescribedTensor& T, const HamiltonControls& controls);

/// Reduced-variable trajectory equivalent to an l-solution with the given scales.
Trajectory to_reduced_trajectory(const LTrajectory& lt, const PrescribedTensor& T, double f1_mid,
                                 double f2_value);

/// Half profile on the checkpoints t < 1 of the l-solution.
MetricProfile reconstruct_metric(const LTrajectory& lt, const PrescribedTensor& T, double f1_mid,
                                 double f2_value);

struct ConstantT2Options {
  double f1_mid = 1.0;
  double f2_value = 1.0;
  HamiltonControls controls;
  EndgameControls endgame;
  AssemblyOptions assembly;
};

/// c2 = alpha / T2, c1 = c1_hat, f2 constant; requires constant T2 and beta = 0.
ScalingSolution solve_constant_T2(const PrescribedTensor& T, const ConstantT2Options& options = {});

}  // namespace ricciwarp
