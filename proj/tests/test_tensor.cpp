#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "ricciwarp/error.hpp"
#include "ricciwarp/tensor.hpp"

using namespace ricciwarp;

namespace {

constexpr double kPi = std::numbers::pi;

// Fourth-order central difference of a scalar sampler.
template <class F>
double fd1(F&& f, double t, double h) {
  return (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h);
}

std::string failing_name(const ValidationReport& r) {
  const auto* c = r.first_failure();
  return c ? c->name : std::string();
}

}  // namespace

TEST(SinPi, ExactAtIntegersAndHalves) {
  EXPECT_EQ(sin_pi(1.0), 0.0);
  EXPECT_EQ(sin_pi(2.0), 0.0);
  EXPECT_EQ(sin_pi(0.5), 1.0);
  EXPECT_EQ(cos_pi(2.0), 1.0);
  EXPECT_EQ(cos_pi(1.0), -1.0);
  EXPECT_NEAR(sin_pi(0.3), std::sin(0.3 * kPi), 1e-15);
  EXPECT_NEAR(cos_pi(-1.7), std::cos(-1.7 * kPi), 1e-15);
}

TEST(Tensor, RoundProductKnownValues) {
  const auto T = builtin_round_product(2, 2);
  const auto v = T.evaluate(0.75, 0);
  EXPECT_NEAR(v.T1, 0.5 / (kPi * kPi), 1e-16);
  EXPECT_NEAR(v.T1, 0.0506606, 5e-8);
  EXPECT_NEAR(v.T2, 1.0 / (2 * kPi * kPi), 1e-16);
  EXPECT_EQ(T.alpha(), 1.0);
  EXPECT_EQ(T.beta(), 0.0);
  EXPECT_EQ(T.evaluate(1.0, 0).T1, 0.0);
  EXPECT_EQ(T.evaluate(1.0, 2).T1, 2.0);
}

TEST(Tensor, OutsideHalfDomainIsDomainError) {
  const auto T = builtin_round_product(2, 2);
  try {
    T.evaluate(0.4, 0);
    FAIL() << "expected DomainError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DomainError);
  }
  EXPECT_THROW(T.evaluate(0.75, 3), Error);
}

TEST(Tensor, DerivativesMatchFiniteDifferences) {
  const auto T = builtin_perturbed_family(3, 2, 0.2);
  for (double t : {0.55, 0.7, 0.85, 0.95}) {
    auto t1 = [&](double s) { return T.t1(s).value; };
    auto t2 = [&](double s) { return T.t2(s).value; };
    auto t1p = [&](double s) { return T.t1(s).first; };
    auto t2p = [&](double s) { return T.t2(s).first; };
    EXPECT_NEAR(T.t1(t).first, fd1(t1, t, 1e-3), 1e-10);
    EXPECT_NEAR(T.t2(t).first, fd1(t2, t, 1e-3), 1e-10);
    EXPECT_NEAR(T.t1(t).second, fd1(t1p, t, 1e-3), 1e-9);
    EXPECT_NEAR(T.t2(t).second, fd1(t2p, t, 1e-3), 1e-9);
  }
}

TEST(Tensor, MirroredEvaluationIsEven) {
  const auto T = builtin_perturbed_family(2, 2, 0.2);
  for (double t : {0.0, 0.1, 0.3, 0.45}) {
    const auto a = T.evaluate_mirrored(t);
    const auto b = T.evaluate(1.0 - t, 0);
    EXPECT_EQ(a.T1, b.T1);
    EXPECT_EQ(a.T2, b.T2);
  }
}

TEST(Validate, BuiltinsPass) {
  for (int d1 : {2, 3, 4}) {
    EXPECT_TRUE(validate(builtin_round_product(d1, 2)).pass) << d1;
    EXPECT_TRUE(validate(builtin_perturbed_family(d1, 3, 0.2)).pass) << d1;
  }
}

TEST(Validate, ConstantT1NamesMonotonicity) {
  const auto base = builtin_round_product(2, 2);
  PrescribedTensor T(2, 2, 1.0, 0.0, [](double) { return Jet{1.0, 0.0, 0.0}; },
                     [](double) { return Jet{0.05, 0.0, 0.0}; }, "const", true);
  const auto r = validate(T);
  EXPECT_FALSE(r.pass);
  bool named = false;
  for (const auto& c : r.conditions)
    if (c.name == "T1'<0 on (1/2,1)") named = !c.pass;
  EXPECT_TRUE(named);
}

TEST(Validate, CubicVanishingNamesEndpointCurvature) {
  PrescribedTensor T(
      2, 2, 1.0, 0.0,
      [](double t) {
        const double u = 1.0 - t;
        return Jet{u * u * u, -3.0 * u * u, 6.0 * u};
      },
      [](double) { return Jet{0.05, 0.0, 0.0}; }, "cubic", true);
  const auto r = validate(T);
  EXPECT_FALSE(r.pass);
  bool curvature_failed = false, others_ok = true;
  for (const auto& c : r.conditions) {
    if (c.name == "T1''(1)=2") curvature_failed = !c.pass;
    else if (c.name != "T1''(1/2)<0" && c.name != "T1'(1/2)=0") others_ok = others_ok && c.pass;
  }
  EXPECT_TRUE(curvature_failed);
  EXPECT_TRUE(others_ok);
}

TEST(Validate, IncreasingT2NamesT2Monotonicity) {
  const auto round = builtin_round_product(2, 2);
  PrescribedTensor T(
      2, 2, 1.0, 0.0, [round](double t) { return round.t1(t); },
      [](double t) {
        const double s = sin_pi(t);
        return Jet{0.05 * (2.0 - s * s), -0.05 * kPi * sin_pi(2 * t),
                   -0.05 * 2 * kPi * kPi * cos_pi(2 * t)};
      },
      "rising_t2", true);
  const auto r = validate(T);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(failing_name(r), "T2'<=0 on [1/2,1]");
}

TEST(Spline, ReproducesClosedFormAndClampsSlopes) {
  const auto exact = builtin_perturbed_family(2, 2, 0.2);
  std::vector<double> t, a, b;
  for (int i = 0; i <= 400; ++i) {
    const double s = 0.5 + 0.5 * i / 400.0;
    t.push_back(s);
    a.push_back(exact.t1(s).value);
    b.push_back(exact.t2(s).value);
  }
  const auto T = tensor_from_table(2, 2, 1.0, 0.0, t, a, b, "table");
  EXPECT_FALSE(T.closed_form());
  for (double s : {0.5, 0.61, 0.777, 0.93, 1.0}) {
    EXPECT_NEAR(T.t1(s).value, exact.t1(s).value, 1e-10);
    EXPECT_NEAR(T.t1(s).first, exact.t1(s).first, 1e-7);
    EXPECT_NEAR(T.t2(s).value, exact.t2(s).value, 1e-10);
  }
  EXPECT_EQ(T.t1(1.0).first, 0.0);
  EXPECT_EQ(T.t2(0.5).first, 0.0);
  EXPECT_NEAR(T.t1(1.0).second, 2.0, 1e-4);
}

TEST(Spline, CsvIngestionAndErrors) {
  const auto dir = std::filesystem::temp_directory_path() / "ricciwarp_spline_test";
  std::filesystem::create_directories(dir);
  const auto good = dir / "good.csv";
  {
    std::ofstream out(good);
    out << "t,T1,T2\n";
    for (int i = 0; i <= 50; ++i) {
      const double s = 0.5 + 0.01 * i;
      out << s << "," << std::pow(std::sin(kPi * s), 2) / (kPi * kPi) << ",0.05\n";
    }
  }
  const auto T = ingest_spline_csv(good.string(), 2, 2, 1.0, 0.0);
  EXPECT_NEAR(T.t2(0.7).value, 0.05, 1e-15);
  const auto bad = dir / "bad.csv";
  {
    std::ofstream out(bad);
    out << "x,y,z\n0.5,1,1\n";
  }
  try {
    ingest_spline_csv(bad.string(), 2, 2, 1.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
  EXPECT_THROW(ingest_spline_csv((dir / "missing.csv").string(), 2, 2, 1.0, 0.0), Error);
}

TEST(Reparametrize, UnitT0IsIdentity) {
  const auto base = builtin_perturbed_family(2, 2, 0.2);
  const auto T = reparametrize_to_unit_T0(base, [](double) { return Jet{1.0, 0.0, 0.0}; }, 64);
  for (double s : {0.5, 0.6, 0.83, 1.0}) {
    EXPECT_NEAR(T.t1(s).value, base.t1(s).value, 1e-14);
    EXPECT_NEAR(T.t1(s).first, base.t1(s).first, 1e-13);
    EXPECT_NEAR(T.t2(s).second, base.t2(s).second, 1e-12);
  }
}

TEST(Reparametrize, ConstantT0RescalesValues) {
  const auto base = builtin_round_product(2, 2);
  const auto T = reparametrize_to_unit_T0(base, [](double) { return Jet{4.0, 0.0, 0.0}; }, 64);
  // Arclength 1 on the half domain: the affine map is the identity, values divide by 4.
  for (double s : {0.55, 0.75, 0.95}) {
    EXPECT_NEAR(T.t1(s).value, base.t1(s).value / 4.0, 1e-14);
    EXPECT_NEAR(T.t1(s).first, base.t1(s).first / 4.0, 1e-13);
  }
}

TEST(Reparametrize, ChainRuleAgainstClosedFormInverse) {
  const auto base = builtin_round_product(2, 2);
  // sqrt(T0) = 1 + t, arclength s(t) = (t - 1/2) + (t^2 - 1/4)/2, half length L = 7/8.
  const auto T = reparametrize_to_unit_T0(
      base, [](double t) { return Jet{(1 + t) * (1 + t), 2 * (1 + t), 2.0}; }, 128);
  const double L = 7.0 / 8.0;
  for (double sigma : {0.5, 0.62, 0.8, 0.97, 1.0}) {
    const double target = (sigma - 0.5) * 2 * L;
    // (t + 1)^2 / 2 = target + 9/8
    const double t = std::sqrt(2.0 * (target + 9.0 / 8.0)) - 1.0;
    EXPECT_NEAR(T.t1(sigma).value, base.t1(std::min(t, 1.0)).value / (4 * L * L), 1e-13);
  }
  auto f = [&](double s) { return T.t1(s).value; };
  auto fp = [&](double s) { return T.t1(s).first; };
  for (double sigma : {0.6, 0.75, 0.9}) {
    EXPECT_NEAR(T.t1(sigma).first, fd1(f, sigma, 1e-3), 1e-9);
    EXPECT_NEAR(T.t1(sigma).second, fd1(fp, sigma, 1e-3), 1e-8);
  }
}

TEST(Reparametrize, ValidateAfterReparametrizationFlagsCurvature) {
  // T1''(1) = 2 is not preserved when T0(1) != 1.
  const auto base = builtin_round_product(2, 2);
  const auto T = reparametrize_to_unit_T0(
      base, [](double t) { return Jet{(1 + t) * (1 + t), 2 * (1 + t), 2.0}; }, 128);
  const auto r = validate(T, 256);
  for (const auto& c : r.conditions)
    if (c.name == "T1''(1)=2") EXPECT_FALSE(c.pass);
}

TEST(Tensor, ConstantT2Detection) {
  EXPECT_TRUE(t2_is_constant(builtin_round_product(2, 2)));
  EXPECT_TRUE(t2_is_constant(builtin_perturbed_family(2, 2, 0.0)));
  EXPECT_FALSE(t2_is_constant(builtin_perturbed_family(2, 2, 0.2)));
}

TEST(Tensor, IntegralOfT2) {
  const auto T = builtin_perturbed_family(2, 2, 0.2);
  const double base = 1.0 / (2 * kPi * kPi);
  // integral over [1/2, 1] of sin^2(pi t) is 1/4
  EXPECT_NEAR(integrate_t2(T), base * (0.5 + 0.2 * 0.25), 1e-15);
}
