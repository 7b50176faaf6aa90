#pragma once

// Regular solutions shot backward from the singular orbit t = 1, where the flow contracts onto them.

#include "ricciwarp/ode_core.hpp"
#include "ricciwarp/tensor.hpp"

namespace ricciwarp {

/// Leading data at t = 1: f1 ~ K (1 - t), h(1) = K, f2(1) = F0.
struct EndpointParams {
  double c1 = 0.0;
  double c2 = 0.0;
  double K = 1.0;
  double F0 = 1.0;
};

struct EndgameControls {
  IntegrationControls integration;
  double eta = 1e-6;     // start distance from t = 1
  double rtol = 1e-12;   // replaces the tolerances in `integration`
  double atol = 1e-14;
  double f_tol = 1e-11;
  int max_iters = 30;
  double c1_window = 1e-3;  // relative search box around the guess
  bool parallel = true;
};

/// Backward integration from t = 1 - eta to 1/2; records in increasing t.
Trajectory integrate_from_endpoint(const EndpointParams& p, const PrescribedTensor& T,
                                   const EndgameControls& controls = {});

struct EndgameResult {
  EndpointParams params;
  Trajectory trajectory;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;  // max norm of the conditions at t = 1/2
};

/// Constant T2: finds c1 with dy1(1/2) = 0, then scales to f1(1/2) = f1_mid and f2 = f2_value.
EndgameResult polish_constant_T2(double c1_guess, const PrescribedTensor& T, double f1_mid,
                                 double f2_value, const EndgameControls& controls = {});

/// General T2: (c1, c2, K, F0) with dy1(1/2) = dy2(1/2) = 0, exp(-2 y1(1/2)) = a and
/// max over checkpoints of exp(-2 y2) + dy2^2 equal to S.
EndgameResult polish_general(const EndpointParams& guess, double a, double S,
                             const PrescribedTensor& T, const EndgameControls& controls = {});

}  // namespace ricciwarp
