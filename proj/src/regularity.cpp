#include "ricciwarp/regularity.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "ricciwarp/error.hpp"

namespace ricciwarp {

namespace {

double horner(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) v = v * x + c[i];
  return v;
}

std::vector<double> poly_fit(const std::vector<double>& x, const std::vector<double>& y,
                             int degree) {
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd A(n, degree + 1);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (int k = 0; k <= degree; ++k, p *= x[i]) A(i, k) = p;
    b(i) = y[i];
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  return {c.data(), c.data() + c.size()};
}

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin());
  const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return (1.0 - w) * ys[i - 1] + w * ys[i];
}

struct WindowPoint {
  double t, u, z1, g, h, y1, y2, dy2;
};

}  // namespace

std::vector<Z1Sample> z1_diagnostic(const Trajectory& traj) {
  std::vector<Z1Sample> out;
  for (const auto& r : traj.records)
    if (r.t > 0.9) out.push_back({r.t, -(1.0 - r.t) * r.dy1});
  if (out.empty()) throw Error(ErrorCode::TailTooShort, "no checkpoints beyond t = 0.9");
  return out;
}

double z1_at(const Trajectory& traj, double t) {
  if (traj.records.empty() || traj.records.back().t < t)
    throw Error(ErrorCode::TailTooShort, "trajectory ends before t = " + std::to_string(t));
  const auto& r = traj.at_or_before(t);
  return -(1.0 - r.t) * r.dy1;
}

std::function<double(double)> TailModel::a_fn() const {
  return [a0 = a0](double) { return a0; };
}

std::function<double(double)> TailModel::b_fn() const {
  return [b0 = b0, b1 = b1, b2 = b2, b3 = b3](double t) {
    const double u = 1.0 - t;
    return b0 + (b1 + (b2 + b3 * u) * u) * u;
  };
}

double TailModel::h(double t) const { return horner(h_poly, 1.0 - t); }

double TailModel::f2(double t) const { return std::exp(horner(y2_poly, 1.0 - t)); }

double TailModel::f1(double t) const {
  if (t >= 1.0) return 0.0;
  return (1.0 - t) * std::exp(interpolate(grid_t, ln_k, t));
}

AsymptoticExtension asymptotic_extend(const Trajectory& traj, const PrescribedTensor& T, double c1,
                                      double c2, const RegularityTolerances& tol) {
  const double probe = z1_at(traj, kSignatureProbe);
  if (!(probe >= tol.signature_lo && probe <= tol.signature_hi))
    throw Error(ErrorCode::NoCollapseSignature,
                "z1 = " + std::to_string(probe) + " at the signature probe");
  const int d1 = T.d1();
  const double u_hi = tol.window_hi;

  std::vector<WindowPoint> all;
  for (const auto& r : traj.records) {
    const double u = 1.0 - r.t;
    if (u > u_hi || u <= 0.0) continue;
    const auto d = rhs_reduced(r, T, c1, c2);
    const double z1 = -u * r.dy1;
    const double z1p = r.dy1 - u * d.ddy1;
    const double g = z1p - (d1 + 1.0) * (z1 - 1.0) / u;
    if (!std::isfinite(g)) continue;
    all.push_back({r.t, u, z1, g, r.h, r.y1, r.y2, r.dy2});
  }

  TailModel model;
  model.a0 = d1 + 1.0;
  model.u_hi = u_hi;
  bool accepted = false;
  std::vector<WindowPoint> win;
  double last_residual = std::numeric_limits<double>::infinity();
  for (double u_lo = tol.window_lo; u_lo <= u_hi / 3.0; u_lo *= std::sqrt(2.0)) {
    win.clear();
    for (const auto& p : all)
      if (p.u >= u_lo * (1.0 - 1e-12)) win.push_back(p);
    if (win.size() < 6) continue;

    // Weighted least squares g ~ b0 + b1 u + b2 u^2 + b3 u^3, weight u.
    const Eigen::Index n = static_cast<Eigen::Index>(win.size());
    Eigen::MatrixXd A(n, 4);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& p = win[static_cast<std::size_t>(i)];
      double w = p.u;
      for (int k = 0; k < 4; ++k, w *= p.u) A(i, k) = w;
      rhs(i) = p.u * p.g;
    }
    const Eigen::Vector4d c = A.colPivHouseholderQr().solve(rhs);
    model.b0 = c(0);
    model.b1 = c(1);
    model.b2 = c(2);
    model.b3 = c(3);
    model.u_lo = win.back().u;

    std::vector<double> ts;
    for (const auto& p : win) ts.push_back(p.t);
    const auto sol = solve_singular_linear(model.a_fn(), model.b_fn(), 1.0, u_hi, ts);
    double res = 0.0;
    for (std::size_t i = 0; i < win.size(); ++i)
      res = std::max(res, std::fabs(sol.x[i] - win[i].z1));
    model.fit_residual = res;
    last_residual = res;
    if (res <= tol.fit) {
      accepted = true;
      break;
    }
  }
  if (!accepted) {
    if (win.size() < 6 && !std::isfinite(last_residual))
      throw Error(ErrorCode::TailTooShort, "too few checkpoints in the fit window");
    throw Error(ErrorCode::FitResidualTooLarge,
                "tail model residual " + std::to_string(last_residual));
  }

  // Dense model grid including the anchor, the innermost window checkpoint.
  const WindowPoint anchor = win.back();
  std::vector<double> grid;
  for (int i = 0; i < tol.model_points; ++i)
    grid.push_back(1.0 - u_hi + u_hi * i / (tol.model_points - 1.0));
  grid.back() = 1.0;
  grid.push_back(anchor.t);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const auto sol = solve_singular_linear(model.a_fn(), model.b_fn(), 1.0, u_hi, grid);
  const std::size_t m = sol.t.size();
  std::vector<double> w(m), tail(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double u = 1.0 - sol.t[i];
    w[i] = u > 0.0 ? (1.0 - sol.x[i]) / u : model.z1_prime_end();
  }
  for (std::size_t i = m - 1; i-- > 0;)
    tail[i] = tail[i + 1] + 0.5 * (w[i] + w[i + 1]) * (sol.t[i + 1] - sol.t[i]);
  const std::size_t ia = static_cast<std::size_t>(
      std::lower_bound(sol.t.begin(), sol.t.end(), anchor.t) - sol.t.begin());
  const double ln_k1 = anchor.y1 - std::log(anchor.u) + tail[ia];
  model.grid_t = sol.t;
  model.z1 = sol.x;
  model.ln_k.resize(m);
  for (std::size_t i = 0; i < m; ++i) model.ln_k[i] = ln_k1 - tail[i];

  std::vector<double> us, hs, y2s, dy2s;
  for (const auto& p : win) {
    us.push_back(p.u);
    hs.push_back(p.h);
    y2s.push_back(p.y2);
    dy2s.push_back(p.dy2);
  }
  model.h_poly = poly_fit(us, hs, 2);
  model.y2_poly = poly_fit(us, y2s, 2);
  model.dy2_poly = poly_fit(us, dy2s, 1);

  AsymptoticExtension ext;
  auto& e = ext.endpoint;
  const double K = std::exp(ln_k1);
  e.f1 = 0.0;
  e.f1p = -K;
  e.f1pp = -2.0 * K * model.z1_prime_end();
  e.h = K;
  e.h_extrap = model.h_poly[0];
  e.hp = -model.h_poly[1];
  e.f2 = std::exp(model.y2_poly[0]);
  e.f2p = e.f2 * model.dy2_poly[0];
  ext.model = std::move(model);
  return ext;
}

const SmoothnessCondition* RegularityReport::first_failure() const {
  for (const auto& c : conditions)
    if (!c.pass) return &c;
  return nullptr;
}

RegularityReport check_smoothness_conditions(const EndpointData& e,
                                             const RegularityTolerances& tol) {
  RegularityReport rep;
  rep.endpoint = e;
  const double h_ref = std::isnan(e.h_extrap) ? e.h : e.h_extrap;
  rep.h_discrepancy = std::isnan(e.h_extrap) ? 0.0 : std::fabs(e.h_extrap - e.h);
  const double slope_gap = std::fabs(e.f1p + h_ref);
  rep.conditions = {
      {"f1(1)=0", std::fabs(e.f1), std::fabs(e.f1) <= tol.value},
      {"f1'(1)=-h(1)<0", slope_gap, e.f1p < 0.0 && slope_gap <= tol.slope},
      {"h'(1)=0", std::fabs(e.hp), std::fabs(e.hp) <= tol.slope},
      {"f1''(1)=0", std::fabs(e.f1pp), std::fabs(e.f1pp) <= tol.curvature * std::fabs(e.f1p)},
      {"f2'(1)=0", std::fabs(e.f2p), std::fabs(e.f2p) <= tol.slope},
      {"f2(1)>0", e.f2, e.f2 > 0.0},
  };
  rep.pass = std::all_of(rep.conditions.begin(), rep.conditions.end(),
                         [](const SmoothnessCondition& c) { return c.pass; });
  return rep;
}

EndpointData endpoint_from_profile(const MetricProfile& m) {
  const std::size_t n = m.size();
  if (n < 5 || m.t.back() != 1.0)
    throw Error(ErrorCode::InvalidArgument, "profile must end at t = 1 with 5 points");
  Eigen::Matrix<double, 5, 5> V;
  for (int i = 0; i < 5; ++i) {
    const double x = m.t[n - 5 + i] - 1.0;
    double p = 1.0;
    for (int k = 0; k < 5; ++k, p *= x) V(i, k) = p;
  }
  const auto lu = V.fullPivLu();
  auto coeffs = [&](const std::vector<double>& v) {
    Eigen::Matrix<double, 5, 1> b;
    for (int i = 0; i < 5; ++i) b(i) = v[n - 5 + i];
    return Eigen::Matrix<double, 5, 1>(lu.solve(b));
  };
  const auto f1 = coeffs(m.f1), h = coeffs(m.h), f2 = coeffs(m.f2);
  EndpointData e;
  e.f1 = f1(0);
  e.f1p = f1(1);
  e.f1pp = 2.0 * f1(2);
  e.h = h(0);
  e.hp = h(1);
  e.f2 = f2(0);
  e.f2p = f2(1);
  e.h_extrap = e.h;
  return e;
}

RegularityReport regularity_report(const Trajectory& traj, const PrescribedTensor& T, double c1,
                                   double c2, const RegularityTolerances& tol) {
  auto tail = z1_diagnostic(traj);
  const double probe = z1_at(traj, kSignatureProbe);
  auto ext = asymptotic_extend(traj, T, c1, c2, tol);
  RegularityReport rep = check_smoothness_conditions(ext.endpoint, tol);
  rep.z1_tail = std::move(tail);
  rep.z1_probe = probe;
  rep.model = std::move(ext.model);
  return rep;
}

}  // namespace ricciwarp
