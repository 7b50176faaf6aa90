#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ricciwarp/error.hpp"
#include "ricciwarp/hamilton_solver.hpp"
#include "ricciwarp/regularity.hpp"

using namespace ricciwarp;

namespace {

constexpr double kPi = std::numbers::pi;

// Closed-form round-product states at the integrator checkpoints.
Trajectory exact_round(double f1_mid = 1.0) {
  Trajectory traj;
  IntegrationControls c;
  for (double t : checkpoint_times(1.0 - 1e-6, c)) {
    const double u = 1.0 - t;
    traj.records.push_back({t, std::log(f1_mid * std::sin(kPi * u)), -kPi / std::tan(kPi * u),
                            0.0, 0.0, kPi * f1_mid});
  }
  traj.final_state = traj.records.back();
  return traj;
}

MetricProfile sampled(std::size_t n, double (*f1)(double), double (*f2)(double)) {
  MetricProfile m;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 0.5 + 0.5 * static_cast<double>(i) / (n - 1);
    m.t.push_back(t);
    m.h.push_back(1.0);
    m.f1.push_back(f1(t));
    m.f2.push_back(f2(t));
  }
  return m;
}

}  // namespace

TEST(Regularity, Z1OfExactRoundProduct) {
  const auto traj = exact_round();
  const auto tail = z1_diagnostic(traj);
  for (const auto& s : tail)
    if (std::fabs(s.t - 0.99) < 1e-12)
      EXPECT_NEAR(s.z1, -0.01 * kPi / std::tan(0.99 * kPi), 1e-12);
  EXPECT_NEAR(-0.01 * kPi / std::tan(0.99 * kPi), 0.99967, 1e-5);
  EXPECT_NEAR(-(1 - traj.records.front().t) * traj.records.front().dy1, 0.0, 1e-15);
  for (int d1 : {2, 3}) {
    const auto res = find_c1_hat(builtin_round_product(d1, 2));
    const auto rt = to_reduced_trajectory(res.trajectory, builtin_round_product(d1, 2), 1.0, 1.0);
    EXPECT_NEAR(z1_at(rt, kSignatureProbe), 1.0, 5e-3) << d1;
  }
  EXPECT_NEAR(z1_at(exact_round(), kSignatureProbe), 1.0, 5e-3);
}

TEST(Regularity, ExtensionReproducesExactEndpoint) {
  for (int d1 : {2, 3, 4}) {
    const auto T = builtin_round_product(d1, 2);
    const double c = d1 * kPi * kPi;
    for (double f1_mid : {1.0, 2.0}) {
      const auto ext = asymptotic_extend(exact_round(f1_mid), T, c, c);
      const auto& e = ext.endpoint;
      EXPECT_EQ(e.f1, 0.0);
      EXPECT_NEAR(e.f1p, -kPi * f1_mid, 1e-6);
      EXPECT_NEAR(e.h, kPi * f1_mid, 1e-6);
      EXPECT_NEAR(e.h_extrap, kPi * f1_mid, 1e-6);
      EXPECT_NEAR(e.hp, 0.0, 1e-6);
      EXPECT_NEAR(e.f1pp, 0.0, 1e-6);
      EXPECT_NEAR(e.f2, 1.0, 1e-12);
      EXPECT_NEAR(e.f2p, 0.0, 1e-12);
      EXPECT_LE(ext.model.fit_residual, 1e-7);
      EXPECT_NEAR(ext.model.a0, d1 + 1.0, 0.0);
      // Model profile agrees with the closed form on the window.
      for (double u : {1e-2, 1e-3, 1e-5, 0.0})
        EXPECT_NEAR(ext.model.f1(1.0 - u), f1_mid * std::sin(kPi * u), 1e-9 * f1_mid);
    }
  }
}

TEST(Regularity, RoundProductPassesAllConditions) {
  const auto T = builtin_round_product(2, 2);
  const double c = 2 * kPi * kPi;
  const auto rep = regularity_report(exact_round(), T, c, c);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.conditions.size(), 6u);
  EXPECT_EQ(rep.first_failure(), nullptr);
  EXPECT_FALSE(rep.z1_tail.empty());
}

TEST(Regularity, HamiltonSolutionPasses) {
  for (int d1 : {2, 3}) {
    const auto T = builtin_round_product(d1, 2);
    const auto res = find_c1_hat(T);
    const auto rt = to_reduced_trajectory(res.trajectory, T, 1.0, 1.0);
    const auto rep = regularity_report(rt, T, res.c1_hat, d1 * kPi * kPi);
    EXPECT_TRUE(rep.pass) << d1 << " " << (rep.first_failure() ? rep.first_failure()->name : "");
    EXPECT_NEAR(rep.endpoint.f1p, -kPi, 1e-6);
    EXPECT_NEAR(rep.endpoint.h_extrap, kPi, 1e-6);
  }
}

TEST(Regularity, NoCollapseSignature) {
  const auto T = builtin_round_product(2, 2);
  IntegrationControls c;
  const auto traj = integrate_reduced({3 * kPi * kPi, 2 * kPi * kPi, 1.0, 1.0}, T, 1.0 - 1e-6, c);
  ASSERT_TRUE(traj.reached_end());
  EXPECT_LT(z1_diagnostic(traj).back().z1, 0.1);
  try {
    asymptotic_extend(traj, T, 3 * kPi * kPi, 2 * kPi * kPi);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoCollapseSignature);
  }
}

TEST(Regularity, TailTooShort) {
  Trajectory traj;
  traj.records.push_back({0.5, 0, 0, 0, 0, 1});
  try {
    z1_diagnostic(traj);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TailTooShort);
  }
}

TEST(Regularity, ProfileConditionFailures) {
  const auto sq = sampled(201, [](double t) { return (1 - t) * (1 - t); }, [](double) { return 1.0; });
  const auto r1 = check_smoothness_conditions(endpoint_from_profile(sq));
  ASSERT_NE(r1.first_failure(), nullptr);
  EXPECT_EQ(r1.first_failure()->name, "f1'(1)=-h(1)<0");
  const auto lin = sampled(201, [](double t) { return 1 - t; }, [](double t) { return 2 - t; });
  const auto r2 = check_smoothness_conditions(endpoint_from_profile(lin));
  ASSERT_NE(r2.first_failure(), nullptr);
  EXPECT_EQ(r2.first_failure()->name, "f2'(1)=0");
  EXPECT_NEAR(r2.conditions[4].value, 1.0, 1e-9);
  EXPECT_NEAR(r2.endpoint.f2p, -1.0, 1e-9);
}
