#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ricciwarp/dop853.hpp"
#include "ricciwarp/tail_integrator.hpp"
#include "ricciwarp/tensor.hpp"

namespace ricciwarp {

/// Log variables y_i = ln f_i with the lapse h, at parameter t.
struct ReducedState {
  double t = 0.5;
  double y1 = 0.0;
  double dy1 = 0.0;
  double y2 = 0.0;
  double dy2 = 0.0;
  double h = 0.0;

  double trace_first(int d1, int d2) const { return d1 * dy1 + d2 * dy2; }
  double trace_square(int d1, int d2) const { return d1 * dy1 * dy1 + d2 * dy2 * dy2; }
};

struct ReducedDerivative {
  double dy1 = 0.0;
  double ddy1 = 0.0;
  double dy2 = 0.0;
  double ddy2 = 0.0;
  double dh = 0.0;
};

/// a = exp(-2 y1(1/2)), gamma = exp(-2 y2(1/2)).
struct ShootingParams {
  double c1 = 0.0;
  double c2 = 0.0;
  double a = 1.0;
  double gamma = 1.0;
};

ReducedDerivative rhs_reduced(const ReducedState& s, const PrescribedTensor& T, double c1,
                              double c2);

/// Lapse at t = 1/2 enforcing the algebraic constraint with zero first derivatives.
double initial_h(const ShootingParams& p, const PrescribedTensor& T);

/// h^2 from the first integral; throws DegenerateDenominator when the denominator vanishes.
double h_algebraic(const ReducedState& s, const PrescribedTensor& T, double c1, double c2);

struct IntegrationControls {
  double rtol = 1e-10;
  double atol = 1e-12;
  int grid_n = 2048;             // checkpoint grid on [0, 1]; spacing 1 / grid_n
  double tail_start = 1e-2;      // log-spaced checkpoints below this distance to t = 1
  int tail_per_decade = 16;
  double tail_switch = 1e-3;     // below this distance integrate in s = -ln(1 - t)
  double blowup_threshold = 10.0;
  double h_max = 1e8;
  std::vector<double> extra_checkpoints;
};

enum class TrajectoryStatus { ReachedEnd, BlowUp, DomainError };

std::string to_string(TrajectoryStatus s);

struct Trajectory {
  std::vector<ReducedState> records;  // checkpoints in increasing t
  TrajectoryStatus status = TrajectoryStatus::ReachedEnd;
  double t_stop = 0.5;
  std::string reason;
  ReducedState final_state;

  bool reached_end() const { return status == TrajectoryStatus::ReachedEnd; }
  /// Last checkpoint at or before t; throws DomainError when none exists.
  const ReducedState& at_or_before(double t) const;
};

/// Integrates the reduced system from t = 1/2 to t_end in (1/2, 1].
Trajectory integrate_reduced(const ShootingParams& p, const PrescribedTensor& T, double t_end,
                             const IntegrationControls& controls = {});

/// Checkpoints used by integrate_reduced, in increasing t (including t_end).
std::vector<double> checkpoint_times(double t_end, const IntegrationControls& controls);
std::vector<Checkpoint> build_checkpoints(double t_end, const IntegrationControls& controls);

struct SingularSolution {
  std::vector<double> t;  // increasing, last entry 1
  std::vector<double> x;
  double x1_prime = 0.0;
};

/// x' = a(t)(x - c)/(1 - t) + b(t) with x(1) = c, on [1 - eps, 1].
/// Requires 1 + a(1) > 0. Samples are returned at `samples` (or 101 uniform points).
SingularSolution solve_singular_linear(const std::function<double(double)>& a,
                                       const std::function<double(double)>& b, double c,
                                       double eps, std::span<const double> samples = {},
                                       double rtol = 1e-12, double atol = 1e-14);

}  // namespace ricciwarp
