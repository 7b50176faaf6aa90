#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ricciwarp/ode_core.hpp"
#include "ricciwarp/profile.hpp"
#include "ricciwarp/tensor.hpp"

namespace ricciwarp {

/// z1 is probed here for the collapse signature.
inline constexpr double kSignatureProbe = 1.0 - 1e-3;

struct Z1Sample {
  double t;
  double z1;
};

/// z1 = -(1 - t) dy1 at every checkpoint with t > 0.9.
std::vector<Z1Sample> z1_diagnostic(const Trajectory& traj);

/// z1 at the last checkpoint at or before t.
double z1_at(const Trajectory& traj, double t);

struct EndpointData {
  double f1 = 0.0, f1p = 0.0, f1pp = 0.0;
  double h = 0.0, hp = 0.0;
  double f2 = 0.0, f2p = 0.0;
  double h_extrap = std::numeric_limits<double>::quiet_NaN();  // independent estimate of h(1)
};

struct RegularityTolerances {
  double value = 1e-12;       // f1(1)
  double slope = 1e-3;        // f1'(1) + h(1), h'(1), f2'(1)
  double curvature = 1e-4;    // |f1''(1)| relative to |f1'(1)|
  double fit = 1e-7;          // sup |z1 model - z1 data| on the fit window
  double signature_lo = 0.8;
  double signature_hi = 1.2;
  double window_hi = 1e-2;    // fit window in u = 1 - t
  double window_lo = 1e-4;    // initial lower edge, widened while the fit fails
  int model_points = 2001;
};

/// Singular-linear tail model z1' = a (z1 - 1)/(1 - t) + b with a = d1 + 1 and b cubic in u.
struct TailModel {
  double a0 = 0.0, b0 = 0.0, b1 = 0.0, b2 = 0.0, b3 = 0.0;
  double u_lo = 0.0, u_hi = 0.0;
  double fit_residual = 0.0;
  std::vector<double> h_poly;    // h(u), quadratic
  std::vector<double> y2_poly;   // ln f2(u), quadratic
  std::vector<double> dy2_poly;  // dy2/dt(u), linear
  std::vector<double> grid_t;    // model grid, increasing to t = 1
  std::vector<double> z1;
  std::vector<double> ln_k;      // ln(f1 / u)

  double z1_prime_end() const { return b0 / (a0 + 1.0); }
  std::function<double(double)> a_fn() const;
  std::function<double(double)> b_fn() const;
  /// Model values at t in [1 - u_hi, 1].
  double h(double t) const;
  double f1(double t) const;
  double f2(double t) const;
};

struct AsymptoticExtension {
  EndpointData endpoint;
  TailModel model;
};

/// Fits the tail model to z1 on the window and extrapolates the endpoint values at t = 1.
AsymptoticExtension asymptotic_extend(const Trajectory& traj, const PrescribedTensor& T, double c1,
                                      double c2, const RegularityTolerances& tol = {});

struct SmoothnessCondition {
  std::string name;
  double value = 0.0;
  bool pass = false;
};

struct RegularityReport {
  EndpointData endpoint;
  std::vector<SmoothnessCondition> conditions;
  bool pass = false;
  double h_discrepancy = std::numeric_limits<double>::quiet_NaN();
  double z1_probe = std::numeric_limits<double>::quiet_NaN();
  std::vector<Z1Sample> z1_tail;
  TailModel model;

  const SmoothnessCondition* first_failure() const;
};

RegularityReport check_smoothness_conditions(const EndpointData& e,
                                             const RegularityTolerances& tol = {});

/// Endpoint data of a profile sampled up to t = 1 from a one-sided quartic through the last points.
EndpointData endpoint_from_profile(const MetricProfile& m);

/// z1 tail, asymptotic extension and the six conditions.
RegularityReport regularity_report(const Trajectory& traj, const PrescribedTensor& T, double c1,
                                   double c2, const RegularityTolerances& tol = {});

}  // namespace ricciwarp
