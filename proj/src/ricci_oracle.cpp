#include "ricciwarp/ricci_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "ricciwarp/error.hpp"

namespace ricciwarp {

namespace {

constexpr double kRoundingFloor = 1e-12;

void check_grid(const MetricProfile& m) {
  const std::size_t n = m.size();
  if (n < 5) throw Error(ErrorCode::GridTooCoarse, "need at least 5 grid points");
  if (m.h.size() != n || m.f1.size() != n || m.f2.size() != n)
    throw Error(ErrorCode::InvalidArgument, "profile arrays differ in length");
  const double span = m.t.back() - m.t.front();
  const double delta = span / static_cast<double>(n - 1);
  if (!(delta > 0.0)) throw Error(ErrorCode::NonuniformGrid, "grid must be increasing");
  for (std::size_t i = 1; i < n; ++i)
    if (std::fabs((m.t[i] - m.t[i - 1]) - delta) > 1e-12 * span)
      throw Error(ErrorCode::NonuniformGrid,
                  "spacing varies at index " + std::to_string(i));
  if (m.analytic) {
    const auto& d = *m.analytic;
    if (d.h1.size() != n || d.f11.size() != n || d.f21.size() != n || d.f12.size() != n ||
        d.f22.size() != n)
      throw Error(ErrorCode::InvalidArgument, "analytic derivative arrays differ in length");
  }
}

double first_stencil(const std::vector<double>& v, std::size_t j, double dt) {
  return (v[j - 2] - 8.0 * v[j - 1] + 8.0 * v[j + 1] - v[j + 2]) / (12.0 * dt);
}

double second_stencil(const std::vector<double>& v, std::size_t j, double dt) {
  return (-v[j - 2] + 16.0 * v[j - 1] - 30.0 * v[j] + 16.0 * v[j + 1] - v[j + 2]) /
         (12.0 * dt * dt);
}

}  // namespace

ResidualReport ricci_residuals(const MetricProfile& m, const PrescribedTensor& T, double c1,
                               double c2, ResidualWindow window) {
  check_grid(m);
  const std::size_t n = m.size();
  const double dt = (m.t.back() - m.t.front()) / static_cast<double>(n - 1);
  const double d1 = T.d1();
  const double d2 = T.d2();
  const double alpha = T.alpha();
  const double beta = T.beta();

  ResidualReport rep;
  rep.grid_spacing = dt;
  rep.grid_n = n;
  rep.analytic = m.analytic.has_value();
  for (std::size_t j = 2; j + 2 < n; ++j) {
    const double t = m.t[j];
    if (t < window.lo || t > window.hi) continue;
    const double h = m.h[j], f1 = m.f1[j], f2 = m.f2[j];
    if (!(f1 > 0.0) || !(f2 > 0.0) || !(h > 0.0)) continue;
    double hp, f1p, f2p, f1pp, f2pp;
    if (m.analytic) {
      const auto& d = *m.analytic;
      hp = d.h1[j];
      f1p = d.f11[j];
      f2p = d.f21[j];
      f1pp = d.f12[j];
      f2pp = d.f22[j];
    } else {
      hp = first_stencil(m.h, j, dt);
      f1p = first_stencil(m.f1, j, dt);
      f2p = first_stencil(m.f2, j, dt);
      f1pp = second_stencil(m.f1, j, dt);
      f2pp = second_stencil(m.f2, j, dt);
    }
    const TensorValues v = T.evaluate_mirrored(t);
    const double h2 = h * h;
    const double lg1 = f1p / f1, lg2 = f2p / f2, lgh = hp / h;
    const double sigma = -d1 * f1pp / f1 - d2 * f2pp / f2 + lgh * (d1 * lg1 + d2 * lg2);
    const double mixed = f1 * f1 / (f2 * f2 * f2 * f2);
    const double r1 = f1pp / (h2 * f1) + (d1 - 1.0) * lg1 * lg1 / h2 + d2 * lg1 * lg2 / h2 -
                      lgh * lg1 / h2 - (d1 - 1.0) / (f1 * f1) - d2 / d1 * beta * mixed +
                      c1 * v.T1 / (f1 * f1);
    const double r2 = f2pp / (h2 * f2) + (d2 - 1.0) * lg2 * lg2 / h2 + d1 * lg1 * lg2 / h2 -
                      lgh * lg2 / h2 - alpha / (f2 * f2) + 2.0 * beta * mixed +
                      c2 * v.T2 / (f2 * f2);
    rep.t.push_back(t);
    rep.sigma.push_back(sigma);
    rep.r0.push_back(c1 - sigma);
    rep.r1.push_back(r1);
    rep.r2.push_back(r2);
    rep.sup_r0 = std::max(rep.sup_r0, std::fabs(c1 - sigma));
    rep.sup_r1 = std::max(rep.sup_r1, std::fabs(r1));
    rep.sup_r2 = std::max(rep.sup_r2, std::fabs(r2));
  }
  rep.sigma_max_dev = rep.sup_r0;
  return rep;
}

std::array<double, 3> convergence_order(const MetricProfile& fine, const MetricProfile& coarse,
                                        const PrescribedTensor& T, double c1, double c2,
                                        ResidualWindow window) {
  check_grid(fine);
  check_grid(coarse);
  const std::size_t nc = coarse.size();
  if (fine.size() != 2 * nc - 1)
    throw Error(ErrorCode::GridsNotNested, "fine grid must halve the coarse spacing");
  const double span = coarse.t.back() - coarse.t.front();
  for (std::size_t i = 0; i < nc; ++i)
    if (std::fabs(fine.t[2 * i] - coarse.t[i]) > 1e-12 * span)
      throw Error(ErrorCode::GridsNotNested, "coarse points are not fine grid points");
  ResidualWindow common{std::max(window.lo, coarse.t[2]), std::min(window.hi, coarse.t[nc - 3])};
  const auto rf = ricci_residuals(fine, T, c1, c2, common);
  const auto rc = ricci_residuals(coarse, T, c1, c2, common);

  // Rounding floor of the second-difference stencil on the fine grid.
  const double eps = std::numeric_limits<double>::epsilon();
  const double dt = rf.grid_spacing;
  double inv_h2 = 0.0;
  for (std::size_t j = 0; j < fine.size(); ++j)
    if (fine.t[j] >= common.lo && fine.t[j] <= common.hi && fine.h[j] > 0.0)
      inv_h2 = std::max(inv_h2, 1.0 / (fine.h[j] * fine.h[j]));
  const double stencil = 50.0 * eps / (dt * dt);
  const std::array<double, 3> floor = {stencil * (T.d1() + T.d2()), stencil * inv_h2,
                                       stencil * inv_h2};
  const std::array<double, 3> sc = {rc.sup_r0, rc.sup_r1, rc.sup_r2};
  const std::array<double, 3> sf = {rf.sup_r0, rf.sup_r1, rf.sup_r2};
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i)
    out[i] = (sf[i] < std::max(floor[i], kRoundingFloor)) ? std::nan("") : std::log2(sc[i] / sf[i]);
  return out;
}

}  // namespace ricciwarp
