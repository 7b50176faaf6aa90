#include "ricciwarp/hamilton_solver.hpp"

#include <cmath>

#include "ricciwarp/error.hpp"
#include "ricciwarp/tail_integrator.hpp"

namespace ricciwarp {

namespace {

using State3 = ode::Vec<3>;

double lower_c1(const PrescribedTensor& T) { return (T.d1() - 1.0) / T.t1(0.5).value; }

}  // namespace

LTrajectory solve_l(double c1, const PrescribedTensor& T, const HamiltonControls& controls) {
  if (!(c1 > 0.0)) throw Error(ErrorCode::InvalidArgument, "c1 must be positive");
  const double d1 = T.d1();
  const double r0 = c1 * T.t1(0.5).value - (d1 - 1.0);
  if (!(r0 > 0.0))
    throw Error(ErrorCode::RadicandNegativeAtStart,
                "c1 T1(1/2) <= d1 - 1 at c1 = " + std::to_string(c1));
  const double k = std::sqrt(c1 / d1);

  const auto pts = build_checkpoints(1.0 - controls.delta, controls.integration);
  LTrajectory lt;
  lt.c1 = c1;
  lt.samples.reserve(pts.size());
  lt.samples.push_back({0.5, 0.0, std::sqrt(r0), 0.0});

  auto rhs = [&](double t, double, const State3& v) {
    const double l = v[0], rho = v[1];
    return State3{k * rho, 0.5 * c1 * T.t1(t).first / rho + (d1 - 1.0) * k * l, -k * l / rho};
  };
  auto keep = [&](double, double, const State3& v) {
    return ode::detail::all_finite(v) && v[1] > 0.0 && v[1] * v[1] >= controls.radicand_floor;
  };
  auto record = [&](std::size_t i, const State3& v) {
    lt.samples.push_back({pts[i].t, v[0], v[1], v[2]});
  };
  ode::StepControls step;
  step.rtol = controls.integration.rtol;
  step.atol = controls.integration.atol;
  const auto out = integrate_toward_endpoint<3>(rhs, State3{0.0, std::sqrt(r0), 0.0}, pts,
                                                controls.integration.tail_switch, step, keep,
                                                record);
  if (out.step.status == ode::StepStatus::Completed) {
    lt.status = LStatus::ReachedEnd;
    lt.t_star = 1.0;
  } else {
    lt.status = LStatus::RadicandNegative;
    lt.t_star = out.t;
  }
  return lt;
}

C1HatResult bisect_c1_hat(const PrescribedTensor& T, const HamiltonControls& controls) {
  double lo = lower_c1(T);
  if (!(lo > 0.0) || !std::isfinite(lo))
    throw Error(ErrorCode::PreconditionViolation, "T1(1/2) must be positive");
  double hi = 2.0 * lo;
  LTrajectory best = solve_l(hi, T, controls);
  int doublings = 0;
  while (!best.reached_end()) {
    if (++doublings > controls.max_doublings)
      throw Error(ErrorCode::NoFeasibleUpperBound,
                  "no feasible c1 up to " + std::to_string(hi));
    lo = hi;
    hi *= 2.0;
    best = solve_l(hi, T, controls);
  }
  C1HatResult res;
  while (hi - lo > controls.tol_c1 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    LTrajectory trial = solve_l(mid, T, controls);
    ++res.iterations;
    if (trial.reached_end()) {
      hi = mid;
      best = std::move(trial);
    } else {
      lo = mid;
    }
  }
  res.c1_hat = hi;
  res.lower = lo;
  res.trajectory = std::move(best);
  return res;
}

C1HatResult find_c1_hat(const PrescribedTensor& T, const HamiltonControls& controls) {
  const auto report = validate(T);
  if (!report.pass)
    throw Error(ErrorCode::PreconditionViolation,
                "tensor fails hypothesis " + report.first_failure()->name);
  if (!t2_is_constant(T))
    throw Error(ErrorCode::PreconditionViolation, "T2 is not constant");
  return bisect_c1_hat(T, controls);
}

Trajectory to_reduced_trajectory(const LTrajectory& lt, const PrescribedTensor& T, double f1_mid,
                                 double f2_value) {
  if (!(f1_mid > 0.0) || !(f2_value > 0.0))
    throw Error(ErrorCode::InvalidArgument, "scales must be positive");
  const double k = std::sqrt(lt.c1 / T.d1());
  const double y1_mid = std::log(f1_mid);
  const double y2 = std::log(f2_value);
  Trajectory traj;
  for (const auto& s : lt.samples) {
    const double f1 = std::exp(y1_mid + s.y1);
    traj.records.push_back({s.t, y1_mid + s.y1, -k * s.l / s.rho, y2, 0.0, f1 * k / s.rho});
  }
  traj.final_state = traj.records.back();
  traj.t_stop = traj.final_state.t;
  if (!lt.reached_end()) {
    traj.status = TrajectoryStatus::BlowUp;
    traj.reason = "radicand";
  }
  return traj;
}

MetricProfile reconstruct_metric(const LTrajectory& lt, const PrescribedTensor& T, double f1_mid,
                                 double f2_value) {
  if (!lt.reached_end())
    throw Error(ErrorCode::RadicandVanishesInInterior,
                "radicand vanishes at t = " + std::to_string(lt.t_star));
  for (const auto& s : lt.samples)
    if (!(s.rho > 0.0))
      throw Error(ErrorCode::RadicandVanishesInInterior,
                  "radicand vanishes at t = " + std::to_string(s.t));
  const auto traj = to_reduced_trajectory(lt, T, f1_mid, f2_value);
  MetricProfile m;
  for (const auto& r : traj.records) {
    m.t.push_back(r.t);
    m.h.push_back(r.h);
    m.f1.push_back(std::exp(r.y1));
    m.f2.push_back(f2_value);
  }
  return m;
}

ScalingSolution solve_constant_T2(const PrescribedTensor& T, const ConstantT2Options& options) {
  if (T.beta() != 0.0) throw Error(ErrorCode::PreconditionViolation, "beta must vanish");
  if (!(options.f1_mid > 0.0) || !(options.f2_value > 0.0))
    throw Error(ErrorCode::InvalidArgument, "f1_mid and f2_value must be positive");
  auto hat = find_c1_hat(T, options.controls);
  // The forward shot loses the regular branch near t = 1; the backward shot from t = 1 keeps it.
  EndgameControls eg = options.endgame;
  eg.integration = options.controls.integration;
  auto polished = polish_constant_T2(hat.c1_hat, T, options.f1_mid, options.f2_value, eg);
  if (!polished.trajectory.reached_end())
    throw Error(ErrorCode::NoConvergence, "backward shot failed: " + polished.trajectory.reason);
  const double gamma = 1.0 / (options.f2_value * options.f2_value);
  const double a = 1.0 / (options.f1_mid * options.f1_mid);
  const auto& p = polished.params;
  ScalingSolution sol = assemble_full_solution(p.c1, p.c2, gamma, a, gamma,
                                               std::move(polished.trajectory), T,
                                               options.controls.integration.grid_n,
                                               options.assembly, std::array{p.K, 0.0, p.F0});
  sol.method = "hamilton";
  sol.c1_lower = hat.lower;
  return sol;
}

}  // namespace ricciwarp
