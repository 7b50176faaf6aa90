#include "ricciwarp/ode_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ricciwarp/error.hpp"
#include "ricciwarp/tail_integrator.hpp"

namespace ricciwarp {

namespace {

using State5 = ode::Vec<5>;

ReducedState unpack(double t, const State5& v) { return {t, v[0], v[1], v[2], v[3], v[4]}; }

State5 pack(const ReducedState& s) { return {s.y1, s.dy1, s.y2, s.dy2, s.h}; }

State5 derivative(const ReducedState& s, const PrescribedTensor& T, double c1, double c2) {
  const ReducedDerivative d = rhs_reduced(s, T, c1, c2);
  return {d.dy1, d.ddy1, d.dy2, d.ddy2, d.dh};
}

}  // namespace

std::vector<Checkpoint> build_checkpoints(double t_end, const IntegrationControls& c) {
  if (c.grid_n < 4 || c.grid_n % 2 != 0)
    throw Error(ErrorCode::InvalidArgument, "grid_n must be even and at least 4");
  const double u_end = 1.0 - t_end;
  std::vector<Checkpoint> pts;
  for (int j = 0; j <= c.grid_n / 2; ++j) {
    const double t = 0.5 + static_cast<double>(j) / c.grid_n;
    if (t < t_end) pts.push_back({t, 1.0 - t});
  }
  for (int k = 0;; ++k) {
    const double u = c.tail_start * std::pow(10.0, -static_cast<double>(k) / c.tail_per_decade);
    if (u <= u_end || u < 1e-300) break;
    pts.push_back({1.0 - u, u});
  }
  if (t_end > 1.0 - c.tail_switch) pts.push_back({1.0 - c.tail_switch, c.tail_switch});
  for (double t : c.extra_checkpoints)
    if (t > 0.5 && t < t_end) pts.push_back({t, 1.0 - t});
  pts.push_back({t_end, u_end});
  std::sort(pts.begin(), pts.end(), [](const Checkpoint& a, const Checkpoint& b) {
    return a.u > b.u;
  });
  std::vector<Checkpoint> unique;
  for (const auto& p : pts) {
    if (!unique.empty() && std::fabs(unique.back().u - p.u) <= 1e-15 * std::max(1.0, p.u) &&
        std::fabs(unique.back().t - p.t) <= 1e-15)
      continue;
    if (!unique.empty() && unique.back().t == p.t) continue;
    unique.push_back(p);
  }
  return unique;
}

std::string to_string(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::ReachedEnd: return "ReachedEnd";
    case TrajectoryStatus::BlowUp: return "BlowUp";
    case TrajectoryStatus::DomainError: return "DomainError";
  }
  return "Unknown";
}

ReducedDerivative rhs_reduced(const ReducedState& s, const PrescribedTensor& T, double c1,
                              double c2) {
  const int d1 = T.d1();
  const int d2 = T.d2();
  const Jet a = T.t1(s.t);
  const Jet b = T.t2(s.t);
  const double e1 = std::exp(-2.0 * s.y1);
  const double e2 = std::exp(-2.0 * s.y2);
  const double beta = T.beta();
  const double eb = beta != 0.0 ? std::exp(2.0 * s.y1 - 4.0 * s.y2) : 0.0;
  const double h2 = s.h * s.h;
  const double damping = 0.5 * d1 * a.first * e1 + 0.5 * d2 * c2 / c1 * b.first * e2;
  ReducedDerivative d;
  d.dy1 = s.dy1;
  d.dy2 = s.dy2;
  d.ddy1 = h2 * ((d1 - 1.0 - c1 * a.value) * e1 - s.dy1 * damping +
                 beta * static_cast<double>(d2) / d1 * eb);
  d.ddy2 = h2 * ((T.alpha() - c2 * b.value) * e2 - s.dy2 * damping - 2.0 * beta * eb);
  d.dh = -s.h * h2 * damping + s.h * s.trace_first(d1, d2);
  return d;
}

double initial_h(const ShootingParams& p, const PrescribedTensor& T) {
  if (!(p.a > 0.0)) throw Error(ErrorCode::NonPositiveA, "a must be positive");
  if (!(p.gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
  const int d1 = T.d1();
  const int d2 = T.d2();
  const TensorValues v = T.evaluate(0.5, 0);
  double den = d1 * p.a * (d1 - 1.0 - p.c1 * v.T1) + d2 * p.gamma * (T.alpha() - p.c2 * v.T2);
  if (T.beta() != 0.0) den -= d2 * T.beta() * p.gamma * p.gamma / p.a;
  if (!(den < 0.0))
    throw Error(ErrorCode::NonNegativeDenominator,
                "initial lapse denominator " + std::to_string(den) + " is not negative");
  return std::sqrt(-p.c1 / den);
}

double h_algebraic(const ReducedState& s, const PrescribedTensor& T, double c1, double c2) {
  const int d1 = T.d1();
  const int d2 = T.d2();
  const TensorValues v = T.evaluate(s.t, 0);
  const double e1 = std::exp(-2.0 * s.y1);
  const double e2 = std::exp(-2.0 * s.y2);
  const double eb = std::exp(2.0 * s.y1 - 4.0 * s.y2);
  const double p1 = d1 * (d1 - 1.0) * e1;
  const double q1 = d1 * c1 * v.T1 * e1;
  const double p2 = d2 * T.alpha() * e2;
  const double q2 = d2 * c2 * v.T2 * e2;
  const double pb = d2 * T.beta() * eb;
  const double den = p1 - q1 + p2 - q2 - pb;
  const double scale = std::fabs(p1) + std::fabs(q1) + std::fabs(p2) + std::fabs(q2) +
                       std::fabs(pb);
  if (std::fabs(den) <= 1e-12 * scale)
    throw Error(ErrorCode::DegenerateDenominator,
                "algebraic lapse denominator vanishes at t = " + std::to_string(s.t));
  const double tr = s.trace_first(d1, d2);
  const double num = tr * tr - s.trace_square(d1, d2) - c1;
  return num / den;
}

const ReducedState& Trajectory::at_or_before(double t) const {
  auto it = std::upper_bound(records.begin(), records.end(), t,
                             [](double v, const ReducedState& r) { return v < r.t; });
  if (it == records.begin())
    throw Error(ErrorCode::DomainError, "no checkpoint at or before t = " + std::to_string(t));
  return *std::prev(it);
}

std::vector<double> checkpoint_times(double t_end, const IntegrationControls& controls) {
  std::vector<double> out;
  for (const auto& c : build_checkpoints(t_end, controls)) out.push_back(c.t);
  return out;
}

Trajectory integrate_reduced(const ShootingParams& p, const PrescribedTensor& T, double t_end,
                             const IntegrationControls& controls) {
  if (!(t_end > 0.5 && t_end <= 1.0))
    throw Error(ErrorCode::DomainError, "t_end must lie in (1/2, 1]");
  const double h0 = initial_h(p, T);
  ReducedState s0{0.5, -0.5 * std::log(p.a), 0.0, -0.5 * std::log(p.gamma), 0.0, h0};
  if (!std::isfinite(h0) || h0 > controls.h_max)
    throw Error(ErrorCode::ImmediateEventAtStart,
                "initial lapse " + std::to_string(h0) + " exceeds h_max");

  const std::vector<Checkpoint> pts = build_checkpoints(t_end, controls);
  Trajectory traj;
  traj.records.reserve(pts.size());
  traj.records.push_back(s0);
  traj.final_state = s0;
  traj.t_stop = 0.5;

  ode::StepControls step;
  step.rtol = controls.rtol;
  step.atol = controls.atol;

  std::string reason;
  auto monitor = [&](double t, double u, const State5& v) {
    if (!ode::detail::all_finite(v)) {
      reason = "nonfinite";
      return false;
    }
    if (v[4] <= 0.0) {
      reason = "h<=0";
      return false;
    }
    if (std::fabs(v[1]) * u > controls.blowup_threshold) {
      reason = "dy1";
      return false;
    }
    if (v[4] > controls.h_max) {
      reason = "h";
      return false;
    }
    (void)t;
    return true;
  };
  auto finish = [&](const ode::StepOutcome<5>& out, double t_reached) {
    traj.final_state = unpack(t_reached, out.y);
    traj.t_stop = t_reached;
    switch (out.status) {
      case ode::StepStatus::Completed:
        return true;
      case ode::StepStatus::Stopped:
        traj.status = (reason == "h<=0") ? TrajectoryStatus::DomainError : TrajectoryStatus::BlowUp;
        traj.reason = reason;
        return false;
      case ode::StepStatus::NonFinite:
        traj.status = TrajectoryStatus::BlowUp;
        traj.reason = "nonfinite";
        return false;
      case ode::StepStatus::StepUnderflow:
        traj.status = TrajectoryStatus::DomainError;
        traj.reason = "step size underflow";
        return false;
      case ode::StepStatus::MaxSteps:
        traj.status = TrajectoryStatus::DomainError;
        traj.reason = "step limit reached";
        return false;
    }
    return false;
  };

  auto rhs = [&](double t, double, const State5& v) {
    return derivative(unpack(t, v), T, p.c1, p.c2);
  };
  auto record = [&](std::size_t i, const State5& v) { traj.records.push_back(unpack(pts[i].t, v)); };
  const auto out = integrate_toward_endpoint<5>(rhs, pack(s0), pts, controls.tail_switch, step,
                                                monitor, record);
  finish(out.step, out.t);
  if (traj.reached_end()) traj.final_state.t = t_end;
  if (!traj.records.empty() && traj.reached_end()) traj.records.back().t = t_end;
  return traj;
}

SingularSolution solve_singular_linear(const std::function<double(double)>& a,
                                       const std::function<double(double)>& b, double c,
                                       double eps, std::span<const double> samples, double rtol,
                                       double atol) {
  if (!(eps > 0.0 && eps <= 0.5)) throw Error(ErrorCode::InvalidArgument, "eps must lie in (0, 1/2]");
  const double a1 = a(1.0);
  if (!(1.0 + a1 > 0.0))
    throw Error(ErrorCode::InvalidArgument, "singular model requires 1 + a(1) > 0");
  const double x1p = b(1.0) / (1.0 + a1);

  std::vector<double> ts;
  if (samples.empty()) {
    for (int i = 0; i <= 100; ++i) ts.push_back(1.0 - eps + eps * i / 100.0);
    ts.back() = 1.0;
  } else {
    ts.assign(samples.begin(), samples.end());
  }
  std::sort(ts.begin(), ts.end());
  for (double t : ts)
    if (t < 1.0 - eps - 1e-15 || t > 1.0)
      throw Error(ErrorCode::DomainError, "sample outside [1 - eps, 1]");

  const double eta = eps / 100.0;
  const double t0 = 1.0 - eta;
  // Second-order Taylor data: x = c + p u + q u^2 with u = 1 - t.
  const double p = -x1p;
  const double a_t = (a1 - a(t0)) / eta;
  const double b_t = (b(1.0) - b(t0)) / eta;
  const double q = (a_t * p + b_t) / (2.0 + a1);
  auto taylor = [&](double u) { return c + p * u + q * u * u; };
  SingularSolution sol;
  sol.x1_prime = x1p;
  sol.t = ts;
  sol.x.assign(ts.size(), c);

  // Taylor step off the singular point, then integrate backward where the flow contracts.
  std::vector<std::size_t> back_idx;
  for (std::size_t i = ts.size(); i-- > 0;) {
    if (ts[i] >= t0)
      sol.x[i] = taylor(1.0 - ts[i]);
    else
      back_idx.push_back(i);
  }
  if (back_idx.empty()) return sol;
  std::vector<double> stops;
  for (std::size_t i : back_idx) stops.push_back(ts[i]);
  ode::StepControls step;
  step.rtol = rtol;
  step.atol = atol;
  auto rhs = [&](double t, const ode::Vec<1>& x) {
    return ode::Vec<1>{a(t) * (x[0] - c) / (1.0 - t) + b(t)};
  };
  auto on_stop = [&](std::size_t k, double, const ode::Vec<1>& x) { sol.x[back_idx[k]] = x[0]; };
  auto keep = [](double, const ode::Vec<1>&) { return true; };
  const auto out = ode::integrate<1>(rhs, t0, ode::Vec<1>{taylor(eta)}, stops, step, on_stop, keep);
  if (out.status != ode::StepStatus::Completed)
    throw Error(ErrorCode::DomainError, "singular linear integration failed with status " +
                                            std::to_string(static_cast<int>(out.status)));
  return sol;
}

}  // namespace ricciwarp
