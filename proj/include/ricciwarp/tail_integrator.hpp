#pragma once

// Two-phase integration toward the singular endpoint t = 1: in t down to the tail switch,
// then in s = -ln(1 - t) so that step sizes stay proportional to the distance to t = 1.

#include <cmath>
#include <limits>
#include <vector>

#include "ricciwarp/dop853.hpp"

namespace ricciwarp {

struct Checkpoint {
  double t;
  double u;  // 1 - t, kept separately for the logarithmic tail
};

template <std::size_t N>
struct TailOutcome {
  ode::StepOutcome<N> step;
  double t = 0.5;  // parameter reached
};

/// pts[0] is the start point; rhs(t, u, y) returns dy/dt; keep(t, u, y) may stop the run;
/// record(i, y) fires for pts[i], i >= 1.
template <std::size_t N, class Rhs, class Keep, class Record>
TailOutcome<N> integrate_toward_endpoint(Rhs&& rhs, const ode::Vec<N>& y0,
                                         const std::vector<Checkpoint>& pts, double tail_switch,
                                         const ode::StepControls& step, Keep&& keep,
                                         Record&& record) {
  TailOutcome<N> result;
  result.step.y = y0;
  result.t = pts.front().t;
  std::vector<double> stops_t;
  std::size_t first_tail = 1;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].u < tail_switch) break;
    stops_t.push_back(pts[i].t);
    first_tail = i + 1;
  }
  ode::Vec<N> y = y0;
  if (!stops_t.empty()) {
    auto f = [&](double t, const ode::Vec<N>& v) { return rhs(t, 1.0 - t, v); };
    auto on_stop = [&](std::size_t i, double, const ode::Vec<N>& v) { record(1 + i, v); };
    auto k = [&](double t, const ode::Vec<N>& v) { return keep(t, 1.0 - t, v); };
    result.step = ode::integrate<N>(f, pts.front().t, y, stops_t, step, on_stop, k);
    result.t = result.step.x;
    if (result.step.status != ode::StepStatus::Completed) return result;
    y = result.step.y;
  }
  if (first_tail >= pts.size()) return result;

  const double s_start = -std::log(pts[first_tail - 1].u);
  std::vector<double> stops_s;
  for (std::size_t i = first_tail; i < pts.size(); ++i) {
    const double u = pts[i].u;
    stops_s.push_back(u > 0.0 ? -std::log(u)
                              : -std::log(std::numeric_limits<double>::epsilon()));
  }
  auto f = [&](double s, const ode::Vec<N>& v) {
    const double u = std::exp(-s);
    ode::Vec<N> d = rhs(1.0 - u, u, v);
    for (double& x : d) x *= u;
    return d;
  };
  auto on_stop = [&](std::size_t i, double, const ode::Vec<N>& v) { record(first_tail + i, v); };
  auto k = [&](double s, const ode::Vec<N>& v) {
    const double u = std::exp(-s);
    return keep(1.0 - u, u, v);
  };
  result.step = ode::integrate<N>(f, s_start, y, stops_s, step, on_stop, k);
  result.t = result.step.status == ode::StepStatus::Completed ? pts.back().t
                                                              : 1.0 - std::exp(-result.step.x);
  return result;
}

}  // namespace ricciwarp
