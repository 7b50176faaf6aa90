#pragma once

// Non-constant T2: shooting in (c2, gamma) at fixed c1 and continuation of c1 down to c1_hat.

#include <limits>
#include <utility>
#include <vector>

#include "ricciwarp/endgame.hpp"
#include "ricciwarp/newton.hpp"
#include "ricciwarp/ode_core.hpp"
#include "ricciwarp/solution.hpp"
#include "ricciwarp/tensor.hpp"

namespace ricciwarp {

struct ShootingResiduals {
  double res_bc = 0.0;   // dy2 where the boundary condition is read
  double res_sup = 0.0;  // max over checkpoints of exp(-2 y2) + dy2^2, minus S
  double end_t = 0.5;
  TrajectoryStatus status = TrajectoryStatus::ReachedEnd;
};

struct ShootControls {
  IntegrationControls integration;
  double t_end = 1.0 - 1e-6;
  double bc_margin = 1e-3;  // read res_bc this far before a blow-up
};

/// Throws InfeasibleInitialH when the lapse at t = 1/2 is not real.
std::pair<Trajectory, ShootingResiduals> shoot(const ShootingParams& p, double S,
                                               const PrescribedTensor& T,
                                               const ShootControls& controls = {});

/// Open window for c2, from T2 decreasing on [1/2, 1].
std::pair<double, double> c2_window(const PrescribedTensor& T);

struct InnerControls {
  ShootControls shoot;
  NewtonOptions newton{50, 1e-6, 1e-10, 1e-13, 12, 3, true};
  double gamma_floor = 1e-8;  // relative to S
};

struct InnerSolution {
  double c1 = 0.0;
  double c2 = 0.0;
  double gamma = 0.0;
  Trajectory trajectory;
  ShootingResiduals residuals;
  bool converged = false;
  int iterations = 0;
};

/// Non-throwing core; a warm start replaces the canonical guess.
InnerSolution try_solve_inner(double c1, double a, double S, const PrescribedTensor& T,
                              const InnerControls& controls = {},
                              std::optional<std::pair<double, double>> warm = std::nullopt);

/// Throws NoConvergence with the best iterate in the message.
InnerSolution solve_inner(double c1, double a, double S, const PrescribedTensor& T,
                          const InnerControls& controls = {},
                          std::optional<std::pair<double, double>> warm = std::nullopt);

struct ContinuationControls {
  InnerControls inner;
  double initial_step = 0.25;  // fraction of c1_start
  double step_tol = 1e-10;     // relative to c1
  int max_steps = 400;
  bool require_collapse = true;  // StallWithoutBlowup when the terminal member has no signature
};

struct ContinuationResult {
  std::vector<InnerSolution> path;  // accepted members, c1 decreasing
  std::vector<ContinuationRecord> log;
  double c1_hat_estimate = 0.0;
  double c1_fail = 0.0;  // most recent failure, the lower end of the final bracket
  double z1_end = 0.0;   // terminal member at the signature probe
};

/// Throws StallWithoutBlowup when the terminal member shows no collapse.
ContinuationResult continue_in_c1(double c1_start, double a, double S, const PrescribedTensor& T,
                                  const ContinuationControls& controls = {});

/// Row for the continuation log.
ContinuationRecord continuation_record(const InnerSolution& s);

struct GeneralOptions {
  double a = 1.0;
  double S = std::numeric_limits<double>::quiet_NaN();  // NaN selects the probe default
  ContinuationControls continuation;
  EndgameControls endgame;
  AssemblyOptions assembly;
  int max_start_doublings = 20;
};

/// 1.1 times the constrained quantity on a probe run at c1_start with gamma = 1.
double default_S(double c1_start, double a, const PrescribedTensor& T,
                 const ShootControls& controls = {});

double default_c1_start(const PrescribedTensor& T);

ScalingSolution solve_general(const PrescribedTensor& T, const GeneralOptions& options = {});

}  // namespace ricciwarp
