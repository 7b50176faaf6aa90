#include "ricciwarp/solution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ricciwarp/error.hpp"

namespace ricciwarp {

InvariantReport monitor_invariants(const Trajectory& traj, int d1, int d2, double sign_tol,
                                   double delta) {
  InvariantReport rep;
  rep.max_dy1 = rep.max_dy2 = rep.max_trace = rep.max_by1d = -std::numeric_limits<double>::infinity();
  for (const auto& r : traj.records) {
    rep.max_dy1 = std::max(rep.max_dy1, r.dy1);
    rep.max_dy2 = std::max(rep.max_dy2, r.dy2);
    if (r.t > 0.5 + 1e-3) rep.max_trace = std::max(rep.max_trace, r.trace_first(d1, d2));
    rep.max_by1d = std::max(rep.max_by1d, -(1.0 - r.t) * r.dy1);
  }
  rep.pass = rep.max_dy1 <= sign_tol && rep.max_dy2 <= sign_tol && rep.max_trace < 0.0 &&
             rep.max_by1d <= 1.0 + delta;
  return rep;
}

MetricProfile assemble_profile(const Trajectory& traj, const RegularityReport& reg, int grid_n,
                               const std::optional<std::array<double, 3>>& end) {
  const int half = grid_n / 2;
  MetricProfile m;
  std::size_t k = 0;
  for (int j = 0; j <= half; ++j) {
    const double t = 0.5 + static_cast<double>(j) / grid_n;
    while (k < traj.records.size() && traj.records[k].t < t - 1e-14) ++k;
    m.t.push_back(t);
    if (j < half && k < traj.records.size() && std::fabs(traj.records[k].t - t) <= 1e-14) {
      const auto& r = traj.records[k];
      m.h.push_back(r.h);
      m.f1.push_back(std::exp(r.y1));
      m.f2.push_back(std::exp(r.y2));
    } else if (j < half) {
      if (1.0 - t > reg.model.u_hi)
        throw Error(ErrorCode::TailTooShort, "trajectory lacks grid point t = " + std::to_string(t));
      m.h.push_back(reg.model.h(t));
      m.f1.push_back(reg.model.f1(t));
      m.f2.push_back(reg.model.f2(t));
    } else if (end) {
      m.h.push_back((*end)[0]);
      m.f1.push_back((*end)[1]);
      m.f2.push_back((*end)[2]);
    } else {
      m.h.push_back(reg.endpoint.h);
      m.f1.push_back(reg.endpoint.f1);
      m.f2.push_back(reg.endpoint.f2);
    }
  }
  return mirror_half_profile(m);
}

ScalingSolution assemble_full_solution(double c1, double c2, double gamma, double a, double S,
                                       Trajectory traj, const PrescribedTensor& T, int grid_n,
                                       const AssemblyOptions& options,
                                       const std::optional<std::array<double, 3>>& end) {
  ScalingSolution sol;
  sol.c1 = c1;
  sol.c2 = c2;
  sol.gamma = gamma;
  sol.a = a;
  sol.S = S;
  sol.regularity = regularity_report(traj, T, c1, c2, options.regularity);
  sol.profile = assemble_profile(traj, sol.regularity, grid_n, end);
  sol.residuals = ricci_residuals(sol.profile, T, c1, c2, options.residual_window);
  sol.residuals_pass = sol.residuals.sup_r0 <= options.residual_tol &&
                       sol.residuals.sup_r1 <= options.residual_tol &&
                       sol.residuals.sup_r2 <= options.residual_tol;
  sol.invariants = monitor_invariants(traj, T.d1(), T.d2());
  sol.trajectory = std::move(traj);
  return sol;
}

}  // namespace ricciwarp
