#include "ricciwarp/general_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ricciwarp/error.hpp"
#include "ricciwarp/regularity.hpp"

namespace ricciwarp {

namespace {

double constrained(const ReducedState& r) { return std::exp(-2.0 * r.y2) + r.dy2 * r.dy2; }

double z1_end(const Trajectory& traj) {
  if (traj.records.empty() || traj.records.back().t < kSignatureProbe) return 0.0;
  return z1_at(traj, kSignatureProbe);
}

}  // namespace

std::pair<Trajectory, ShootingResiduals> shoot(const ShootingParams& p, double S,
                                               const PrescribedTensor& T,
                                               const ShootControls& controls) {
  Trajectory traj;
  try {
    traj = integrate_reduced(p, T, controls.t_end, controls.integration);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NonNegativeDenominator || e.code() == ErrorCode::ImmediateEventAtStart)
      throw Error(ErrorCode::InfeasibleInitialH, e.what());
    throw;
  }
  ShootingResiduals r;
  r.status = traj.status;
  r.end_t = traj.reached_end() ? traj.records.back().t : traj.t_stop;
  const double t_bc = traj.reached_end() ? controls.t_end : traj.t_stop - controls.bc_margin;
  double sup = -std::numeric_limits<double>::infinity();
  for (const auto& rec : traj.records)
    if (rec.t <= std::max(t_bc, 0.5)) sup = std::max(sup, constrained(rec));
  r.res_sup = sup - S;
  r.res_bc = traj.at_or_before(std::max(t_bc, 0.5)).dy2;
  return {std::move(traj), r};
}

std::pair<double, double> c2_window(const PrescribedTensor& T) {
  return {T.alpha() / T.t2(0.5).value, T.alpha() / T.t2(1.0).value};
}

InnerSolution try_solve_inner(double c1, double a, double S, const PrescribedTensor& T,
                              const InnerControls& controls,
                              std::optional<std::pair<double, double>> warm) {
  if (T.beta() != 0.0) throw Error(ErrorCode::PreconditionViolation, "beta must vanish");
  const double c1_min = (T.d1() - 1.0) / T.t1(0.5).value;
  if (!(c1 > c1_min))
    throw Error(ErrorCode::PreconditionViolation,
                "c1 must exceed (d1 - 1) / T1(1/2) = " + std::to_string(c1_min));
  if (!(S > 0.0)) throw Error(ErrorCode::InvalidArgument, "S must be positive");

  auto [w_lo, w_hi] = c2_window(T);
  NVec<2> lo, hi, x;
  if (w_hi - w_lo <= 1e-12 * w_hi) {
    lo(0) = hi(0) = w_lo;
  } else {
    const double pad = 1e-9 * (w_hi - w_lo);
    lo(0) = w_lo + pad;
    hi(0) = w_hi - pad;
  }
  lo(1) = controls.gamma_floor * S;
  hi(1) = S;
  if (warm) x << warm->first, warm->second;
  else x << T.alpha() / (2.0 * integrate_t2(T)), S;

  auto fun = [&](const NVec<2>& v) -> std::optional<NVec<2>> {
    try {
      const auto [traj, r] = shoot({c1, v(0), a, v(1)}, S, T, controls.shoot);
      NVec<2> f(r.res_bc, r.res_sup);
      if (!f.allFinite()) return std::nullopt;
      return f;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InfeasibleInitialH) return std::nullopt;
      throw;
    }
  };
  const auto nr = damped_newton<2>(fun, x, lo, hi, controls.newton);

  InnerSolution s;
  s.c1 = c1;
  s.c2 = nr.x(0);
  s.gamma = nr.x(1);
  s.iterations = nr.iterations;
  try {
    auto [traj, r] = shoot({c1, s.c2, a, s.gamma}, S, T, controls.shoot);
    s.trajectory = std::move(traj);
    s.residuals = r;
    s.converged = nr.converged && s.trajectory.reached_end() &&
                  std::fabs(r.res_bc) <= controls.newton.f_tol &&
                  std::fabs(r.res_sup) <= controls.newton.f_tol;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InfeasibleInitialH) throw;
    s.converged = false;
  }
  return s;
}

InnerSolution solve_inner(double c1, double a, double S, const PrescribedTensor& T,
                          const InnerControls& controls,
                          std::optional<std::pair<double, double>> warm) {
  auto s = try_solve_inner(c1, a, S, T, controls, warm);
  if (!s.converged) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "inner solve at c1 = " << c1 << " stopped at c2 = " << s.c2 << ", gamma = " << s.gamma
        << " with res_bc = " << s.residuals.res_bc << ", res_sup = " << s.residuals.res_sup;
    throw Error(ErrorCode::NoConvergence, msg.str());
  }
  return s;
}

ContinuationRecord continuation_record(const InnerSolution& s) {
  return {s.c1, s.c2, s.gamma, s.residuals.end_t, s.residuals.res_bc, s.residuals.res_sup,
          z1_end(s.trajectory)};
}

ContinuationResult continue_in_c1(double c1_start, double a, double S, const PrescribedTensor& T,
                                  const ContinuationControls& controls) {
  ContinuationResult res;
  res.path.push_back(solve_inner(c1_start, a, S, T, controls.inner));
  res.log.push_back(continuation_record(res.path.back()));
  const double c1_min = (T.d1() - 1.0) / T.t1(0.5).value;
  double step = controls.initial_step * c1_start;
  res.c1_fail = c1_min;
  for (int k = 0; k < controls.max_steps; ++k) {
    const InnerSolution& last = res.path.back();
    const double c1 = last.c1 - step;
    bool ok = false;
    if (c1 > c1_min) {
      auto next = try_solve_inner(c1, a, S, T, controls.inner, std::pair{last.c2, last.gamma});
      if (next.converged) {
        res.log.push_back(continuation_record(next));
        res.path.push_back(std::move(next));
        ok = true;
      }
    }
    if (!ok) {
      res.c1_fail = c1;
      step *= 0.5;
    }
    if (step <= controls.step_tol * res.path.back().c1) break;
  }
  const double c1_ok = res.path.back().c1;
  res.c1_hat_estimate = 0.5 * (c1_ok + res.c1_fail);
  res.z1_end = z1_end(res.path.back().trajectory);
  const RegularityTolerances sig;
  if (controls.require_collapse && !(res.z1_end >= sig.signature_lo && res.z1_end <= sig.signature_hi))
    throw Error(ErrorCode::StallWithoutBlowup, "c1 bracket collapsed at " + std::to_string(c1_ok) +
                                                   " with z1 = " + std::to_string(res.z1_end));
  return res;
}

double default_c1_start(const PrescribedTensor& T) { return 4.0 * (T.d1() - 1.0) / T.t1(0.5).value; }

double default_S(double c1_start, double a, const PrescribedTensor& T,
                 const ShootControls& controls) {
  const double c2 = T.alpha() / (2.0 * integrate_t2(T));
  const auto [traj, r] = shoot({c1_start, c2, a, 1.0}, 0.0, T, controls);
  return 1.1 * r.res_sup;
}

ScalingSolution solve_general(const PrescribedTensor& T, const GeneralOptions& options) {
  const auto report = validate(T);
  if (!report.pass)
    throw Error(ErrorCode::PreconditionViolation,
                "tensor fails validation: " + report.first_failure()->name);
  if (T.beta() != 0.0) throw Error(ErrorCode::PreconditionViolation, "beta must vanish");
  if (!(options.a > 0.0)) throw Error(ErrorCode::NonPositiveA, "a must be positive");
  const auto& cc = options.continuation;

  double c1_start = default_c1_start(T);
  double S = options.S;
  for (int k = 0;; ++k) {
    if (k > options.max_start_doublings)
      throw Error(ErrorCode::NoConvergence, "no converged start for the c1 continuation");
    try {
      if (std::isnan(options.S)) S = default_S(c1_start, options.a, T, cc.inner.shoot);
      if (try_solve_inner(c1_start, options.a, S, T, cc.inner).converged) break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InfeasibleInitialH) throw;
    }
    c1_start *= 2.0;
  }
  ContinuationResult cont = continue_in_c1(c1_start, options.a, S, T, cc);
  const InnerSolution& last = cont.path.back();

  // Endpoint guess from the collapsing forward member.
  const ReducedState& probe = last.trajectory.at_or_before(kSignatureProbe);
  const double u = 1.0 - probe.t;
  EndpointParams guess{cont.c1_hat_estimate, last.c2, std::exp(probe.y1) / u, std::exp(probe.y2)};
  EndgameControls eg = options.endgame;
  eg.integration = cc.inner.shoot.integration;
  auto polished = polish_general(guess, options.a, S, T, eg);
  if (!polished.converged || !polished.trajectory.reached_end()) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "endpoint shot did not converge near c1 = " << guess.c1
        << " (residual " << polished.residual << ")";
    throw Error(ErrorCode::NoConvergence, msg.str());
  }
  const auto& p = polished.params;
  const double gamma = std::exp(-2.0 * polished.trajectory.records.front().y2);
  ScalingSolution sol = assemble_full_solution(p.c1, p.c2, gamma, options.a, S,
                                               std::move(polished.trajectory), T,
                                               cc.inner.shoot.integration.grid_n, options.assembly,
                                               std::array{p.K, 0.0, p.F0});
  sol.method = "general";
  sol.c1_lower = cont.c1_fail;
  sol.continuation = std::move(cont.log);
  return sol;
}

}  // namespace ricciwarp
