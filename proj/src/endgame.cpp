#include "ricciwarp/endgame.hpp"

#include <algorithm>
#include <cmath>

#include "ricciwarp/error.hpp"
#include "ricciwarp/newton.hpp"

namespace ricciwarp {

namespace {

using State5 = ode::Vec<5>;

State5 derivative(double t, const State5& v, const PrescribedTensor& T, double c1, double c2) {
  const ReducedDerivative d = rhs_reduced({t, v[0], v[1], v[2], v[3], v[4]}, T, c1, c2);
  return {d.dy1, d.ddy1, d.dy2, d.ddy2, d.dh};
}

double sup_constraint(const Trajectory& traj, double F0) {
  double s = 1.0 / (F0 * F0);
  for (const auto& r : traj.records) s = std::max(s, std::exp(-2.0 * r.y2) + r.dy2 * r.dy2);
  return s;
}

}  // namespace

Trajectory integrate_from_endpoint(const EndpointParams& p, const PrescribedTensor& T,
                                   const EndgameControls& controls) {
  if (!(p.K > 0.0) || !(p.F0 > 0.0))
    throw Error(ErrorCode::InvalidArgument, "endpoint scales must be positive");
  const auto& ic = controls.integration;
  const double eta = controls.eta;
  const int d1 = T.d1();
  const auto pts = build_checkpoints(1.0 - eta, ic);
  const std::size_t n = pts.size();

  // Regular leading-order data; dy2 carries its linear term.
  const double A = p.K * p.K * (T.alpha() - p.c2 * T.t2(1.0).value) / (p.F0 * p.F0);
  State5 y{std::log(p.K * eta), -1.0 / eta, std::log(p.F0), -A * eta / (d1 + 1.0), p.K};

  std::vector<ReducedState> recs(n);
  std::vector<bool> have(n, false);
  recs[n - 1] = {pts[n - 1].t, y[0], y[1], y[2], y[3], y[4]};
  have[n - 1] = true;

  Trajectory traj;
  std::string reason;
  auto keep_state = [&](double u, const State5& v) {
    if (!ode::detail::all_finite(v)) reason = "nonfinite";
    else if (v[4] <= 0.0) reason = "h<=0";
    else if (v[4] > ic.h_max) reason = "h";
    else if (std::fabs(v[1]) * u > ic.blowup_threshold) reason = "dy1";
    else return true;
    return false;
  };
  ode::StepControls step;
  step.rtol = controls.rtol;
  step.atol = controls.atol;

  auto fail = [&](const ode::StepOutcome<5>& out, double t) {
    traj.status = (out.status == ode::StepStatus::Stopped && reason == "h<=0")
                      ? TrajectoryStatus::DomainError
                      : TrajectoryStatus::BlowUp;
    traj.reason = reason.empty() ? "integration failure" : reason;
    traj.t_stop = t;
  };

  // Tail phase in s = -ln(1 - t), decreasing.
  std::vector<std::size_t> tail_idx;
  for (std::size_t i = n - 1; i-- > 0;) {
    if (pts[i].u > ic.tail_switch) break;
    tail_idx.push_back(i);
  }
  double s_now = -std::log(eta);
  if (!tail_idx.empty()) {
    std::vector<double> stops;
    for (std::size_t i : tail_idx) stops.push_back(-std::log(pts[i].u));
    auto f = [&](double s, const State5& v) {
      const double u = std::exp(-s);
      State5 d = derivative(1.0 - u, v, T, p.c1, p.c2);
      for (double& x : d) x *= u;
      return d;
    };
    auto on_stop = [&](std::size_t k, double, const State5& v) {
      const std::size_t i = tail_idx[k];
      recs[i] = {pts[i].t, v[0], v[1], v[2], v[3], v[4]};
      have[i] = true;
    };
    auto keep = [&](double s, const State5& v) { return keep_state(std::exp(-s), v); };
    const auto out = ode::integrate<5>(f, s_now, y, stops, step, on_stop, keep);
    if (out.status != ode::StepStatus::Completed) {
      fail(out, 1.0 - std::exp(-out.x));
      return traj;
    }
    y = out.y;
    s_now = stops.back();
  }
  // Interior phase in t, decreasing to 1/2.
  const std::size_t first_interior = tail_idx.empty() ? n - 1 : tail_idx.back();
  std::vector<std::size_t> idx;
  for (std::size_t i = first_interior; i-- > 0;) idx.push_back(i);
  if (!idx.empty()) {
    std::vector<double> stops;
    for (std::size_t i : idx) stops.push_back(pts[i].t);
    auto f = [&](double t, const State5& v) { return derivative(t, v, T, p.c1, p.c2); };
    auto on_stop = [&](std::size_t k, double, const State5& v) {
      const std::size_t i = idx[k];
      recs[i] = {pts[i].t, v[0], v[1], v[2], v[3], v[4]};
      have[i] = true;
    };
    auto keep = [&](double t, const State5& v) { return keep_state(1.0 - t, v); };
    const double t_now = 1.0 - std::exp(-s_now);
    const auto out = ode::integrate<5>(f, t_now, y, stops, step, on_stop, keep);
    if (out.status != ode::StepStatus::Completed) {
      fail(out, out.x);
      return traj;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (have[i]) traj.records.push_back(recs[i]);
  traj.records.front().t = 0.5;
  traj.status = TrajectoryStatus::ReachedEnd;
  traj.final_state = traj.records.back();
  traj.t_stop = traj.final_state.t;
  return traj;
}

EndgameResult polish_constant_T2(double c1_guess, const PrescribedTensor& T, double f1_mid,
                                 double f2_value, const EndgameControls& controls) {
  const double c2 = T.alpha() / T.t2(0.5).value;
  auto fun = [&](const NVec<1>& x) -> std::optional<NVec<1>> {
    const auto traj = integrate_from_endpoint({x(0), c2, 1.0, 1.0}, T, controls);
    if (!traj.reached_end()) return std::nullopt;
    return NVec<1>(traj.records.front().dy1);
  };
  NewtonOptions opt;
  opt.f_tol = controls.f_tol;
  opt.max_iters = controls.max_iters;
  opt.parallel = false;
  const NVec<1> lo(c1_guess * (1.0 - controls.c1_window));
  const NVec<1> hi(c1_guess * (1.0 + controls.c1_window));
  const auto nr = damped_newton<1>(fun, NVec<1>(c1_guess), lo, hi, opt);

  EndgameResult res;
  res.converged = nr.converged;
  res.iterations = nr.iterations;
  res.residual = std::fabs(nr.f(0));
  const double c1 = nr.x(0);
  const auto unit = integrate_from_endpoint({c1, c2, 1.0, 1.0}, T, controls);
  if (!unit.reached_end())
    throw Error(ErrorCode::NoConvergence, "backward shot fails at the polished c1");
  const double K = f1_mid / std::exp(unit.records.front().y1);
  res.params = {c1, c2, K, f2_value};
  res.trajectory = integrate_from_endpoint(res.params, T, controls);
  return res;
}

EndgameResult polish_general(const EndpointParams& guess, double a, double S,
                             const PrescribedTensor& T, const EndgameControls& controls) {
  auto conditions = [&](const Trajectory& traj, double F0) {
    const auto& r = traj.records.front();
    NVec<4> g;
    g << r.dy1, r.dy2, (std::exp(-2.0 * r.y1) - a) / a, (sup_constraint(traj, F0) - S) / S;
    return g;
  };
  auto fun = [&](const NVec<4>& x) -> std::optional<NVec<4>> {
    const EndpointParams p{x(0), x(1), x(2), x(3)};
    const auto traj = integrate_from_endpoint(p, T, controls);
    if (!traj.reached_end()) return std::nullopt;
    return conditions(traj, p.F0);
  };
  const double w = controls.c1_window;
  NVec<4> x0, lo, hi;
  x0 << guess.c1, guess.c2, guess.K, guess.F0;
  lo << guess.c1 * (1.0 - w), guess.c2 * (1.0 - w), 0.5 * guess.K, 0.5 * guess.F0;
  hi << guess.c1 * (1.0 + w), guess.c2 * (1.0 + w), 2.0 * guess.K, 2.0 * guess.F0;
  // c2 stays inside the open window alpha / T2(1/2) < c2 < alpha / T2(1).
  const double w_lo = T.alpha() / T.t2(0.5).value, w_hi = T.alpha() / T.t2(1.0).value;
  if (w_hi - w_lo <= 1e-12 * w_hi) {
    lo(1) = hi(1) = x0(1) = w_lo;
  } else {
    const double pad = 1e-9 * (w_hi - w_lo);
    lo(1) = std::max(lo(1), w_lo + pad);
    hi(1) = std::min(hi(1), w_hi - pad);
  }
  NewtonOptions opt;
  opt.f_tol = controls.f_tol;
  opt.max_iters = controls.max_iters;
  opt.parallel = controls.parallel;
  const auto nr = damped_newton<4>(fun, x0, lo, hi, opt);

  EndgameResult res;
  res.converged = nr.converged;
  res.iterations = nr.iterations;
  res.residual = nr.f.cwiseAbs().maxCoeff();
  res.params = {nr.x(0), nr.x(1), nr.x(2), nr.x(3)};
  res.trajectory = integrate_from_endpoint(res.params, T, controls);
  return res;
}

}  // namespace ricciwarp
