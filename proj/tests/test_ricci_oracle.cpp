#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ricciwarp/error.hpp"
#include "ricciwarp/ricci_oracle.hpp"

using namespace ricciwarp;

namespace {

constexpr double kPi = std::numbers::pi;

MetricProfile constant_profile(std::size_t n, double h, double f1, double f2) {
  MetricProfile m;
  for (std::size_t i = 0; i < n; ++i) {
    m.t.push_back(0.5 + 0.5 * static_cast<double>(i) / (n - 1));
    m.h.push_back(h);
    m.f1.push_back(f1);
    m.f2.push_back(f2);
  }
  return m;
}

// A non-solution profile with closed-form derivatives.
MetricProfile wobbly_profile(std::size_t n, double lambda = 1.0) {
  MetricProfile m;
  ProfileDerivatives d;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 0.55 + 0.4 * static_cast<double>(i) / (n - 1);
    m.t.push_back(t);
    m.h.push_back(lambda * (1.0 + t * t));
    m.f1.push_back(lambda * std::sin(kPi * t));
    m.f2.push_back(lambda * (2.0 + std::cos(t)));
    d.h1.push_back(lambda * 2.0 * t);
    d.f11.push_back(lambda * kPi * std::cos(kPi * t));
    d.f12.push_back(-lambda * kPi * kPi * std::sin(kPi * t));
    d.f21.push_back(-lambda * std::sin(t));
    d.f22.push_back(-lambda * std::cos(t));
  }
  m.analytic = d;
  return m;
}

}  // namespace

TEST(RicciOracle, ConstantProfileClosedForm) {
  // h = 1, f1 = 2, f2 = 3, d1 = d2 = 2, alpha = 1, c1 = c2 = 0.
  PrescribedTensor T(2, 2, 1.0, 0.0, [](double) { return Jet{0.1, 0.0, 0.0}; },
                     [](double) { return Jet{0.1, 0.0, 0.0}; }, "flat", true);
  const auto r = ricci_residuals(constant_profile(9, 1.0, 2.0, 3.0), T, 0.0, 0.0);
  ASSERT_EQ(r.t.size(), 5u);
  for (std::size_t i = 0; i < r.t.size(); ++i) {
    EXPECT_NEAR(r.r0[i], 0.0, 1e-15);
    EXPECT_NEAR(r.r1[i], -0.25, 1e-15);
    EXPECT_NEAR(r.r2[i], -1.0 / 9.0, 1e-15);
  }
}

TEST(RicciOracle, ExactRoundProductIsSmall) {
  for (int d1 : {2, 3}) {
    const auto T = builtin_round_product(d1, 2);
    const double c = d1 * kPi * kPi;
    const auto m = round_product_profile(0.5, 1.0 - 1.0 / 64.0, 512);
    const auto r = ricci_residuals(m, T, c, c);
    EXPECT_LE(r.sup_r0, 1e-8);
    EXPECT_LE(r.sup_r1, 1e-8);
    EXPECT_LE(r.sup_r2, 1e-8);
    EXPECT_FALSE(r.analytic);
    EXPECT_NEAR(r.sigma_max_dev, r.sup_r0, 0.0);
  }
}

TEST(RicciOracle, AnalyticDerivativesReachRoundingLevel) {
  const auto T = builtin_round_product(3, 2);
  const double c = 3 * kPi * kPi;
  const auto m = round_product_profile(0.1, 0.9, 101, 1.0, 1.0, true);
  const auto r = ricci_residuals(m, T, c, c);
  EXPECT_TRUE(r.analytic);
  EXPECT_LE(r.sup_r0, 1e-12);
  EXPECT_LE(r.sup_r1, 1e-12);
  EXPECT_LE(r.sup_r2, 1e-12);
}

TEST(RicciOracle, IndependentArclengthFormulation) {
  // Ricci of dt^2 h^2 + f1^2 g1 + f2^2 g2 in arclength s with f_s = f'/h.
  const auto T = builtin_perturbed_family(3, 2, 0.2);
  const double c1 = 25.0, c2 = 14.0;
  const auto m = wobbly_profile(41);
  const auto r = ricci_residuals(m, T, c1, c2);
  const auto& d = *m.analytic;
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    const std::size_t j = k + 2;
    const double h = m.h[j], f1 = m.f1[j], f2 = m.f2[j];
    const double f1s = d.f11[j] / h, f2s = d.f21[j] / h;
    const double f1ss = (d.f12[j] * h - d.f11[j] * d.h1[j]) / (h * h * h);
    const double f2ss = (d.f22[j] * h - d.f21[j] * d.h1[j]) / (h * h * h);
    const double ric_ss = -3.0 * f1ss / f1 - 2.0 * f2ss / f2;
    const double ric_1 = -f1ss / f1 - 2.0 * (f1s / f1) * (f1s / f1) - 2.0 * f1s * f2s / (f1 * f2) +
                         2.0 / (f1 * f1);
    const double ric_2 = -f2ss / f2 - (f2s / f2) * (f2s / f2) - 3.0 * f1s * f2s / (f1 * f2) +
                         T.alpha() / (f2 * f2);
    const auto v = T.evaluate(m.t[j] < 0.5 ? 1 - m.t[j] : m.t[j], 0);
    EXPECT_NEAR(r.r0[k], c1 - h * h * ric_ss, 1e-11);
    EXPECT_NEAR(r.r1[k], -ric_1 + c1 * v.T1 / (f1 * f1), 1e-11);
    EXPECT_NEAR(r.r2[k], -ric_2 + c2 * v.T2 / (f2 * f2), 1e-11);
  }
}

TEST(RicciOracle, FourthOrderConvergence) {
  const auto T = builtin_round_product(2, 2);
  const double c = 2 * kPi * kPi;
  const auto coarse = round_product_profile(0.5, 1.0 - 1.0 / 64.0, 129);
  const auto fine = round_product_profile(0.5, 1.0 - 1.0 / 64.0, 257);
  const auto order = convergence_order(fine, coarse, T, c, c);
  // r0 sits at the stencil rounding floor on this grid pair; r2 vanishes identically.
  EXPECT_TRUE(std::isnan(order[0]));
  EXPECT_NEAR(order[1], 4.0, 0.5);
  EXPECT_TRUE(std::isnan(order[2]));
  const auto o2 = convergence_order(round_product_profile(0.5, 1.0 - 1.0 / 64.0, 65),
                                    round_product_profile(0.5, 1.0 - 1.0 / 64.0, 33), T, c, c);
  EXPECT_NEAR(o2[0], 4.0, 0.5);
  EXPECT_NEAR(o2[1], 4.0, 0.5);
}

TEST(RicciOracle, ScaleInvarianceOfTheRicciTensor) {
  // g -> lambda^2 g leaves Ric unchanged: r0 is invariant, r1 and r2 scale by 1/lambda^2.
  const auto T = builtin_perturbed_family(2, 3, 0.2);
  const double c1 = 21.0, c2 = 9.0, lambda = 1.7;
  const auto a = ricci_residuals(wobbly_profile(33), T, c1, c2);
  const auto b = ricci_residuals(wobbly_profile(33, lambda), T, c1, c2);
  for (std::size_t k = 0; k < a.t.size(); ++k) {
    EXPECT_NEAR(b.r0[k], a.r0[k], 1e-12 * (1 + std::fabs(a.r0[k])));
    EXPECT_NEAR(b.r1[k], a.r1[k] / (lambda * lambda), 1e-12 * (1 + std::fabs(a.r1[k])));
    EXPECT_NEAR(b.r2[k], a.r2[k] / (lambda * lambda), 1e-12 * (1 + std::fabs(a.r2[k])));
  }
}

TEST(RicciOracle, WindowRestrictsEvaluation) {
  const auto T = builtin_round_product(2, 2);
  const auto m = round_product_profile(0.0, 1.0, 1025);
  const auto r = ricci_residuals(m, T, 2 * kPi * kPi, 2 * kPi * kPi, {1e-3, 1 - 1e-3});
  EXPECT_GE(r.t.front(), 1e-3);
  EXPECT_LE(r.t.back(), 1 - 1e-3);
  EXPECT_LE(r.sup_r1, 1e-6);
}

TEST(RicciOracle, GridErrors) {
  const auto T = builtin_round_product(2, 2);
  try {
    ricci_residuals(constant_profile(4, 1, 1, 1), T, 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GridTooCoarse);
  }
  auto m = constant_profile(9, 1, 1, 1);
  m.t[4] += 1e-6;
  try {
    ricci_residuals(m, T, 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonuniformGrid);
  }
  const auto coarse = round_product_profile(0.5, 0.9, 33);
  const auto wrong = round_product_profile(0.5, 0.9, 60);
  try {
    convergence_order(wrong, coarse, T, 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GridsNotNested);
  }
}
