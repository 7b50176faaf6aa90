#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace ricciwarp {

/// Value and first two derivatives of a scalar function at one point.
struct Jet {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
};

using JetFunction = std::function<Jet(double)>;

struct TensorValues {
  double T1 = 0.0;
  double T2 = 0.0;
};

/// T = dt^2 + T1 Omega1^2 + T2 Omega2^2 on the half domain [1/2, 1].
class PrescribedTensor {
 public:
  PrescribedTensor(int d1, int d2, double alpha, double beta, JetFunction t1, JetFunction t2,
                   std::string name, bool closed_form);

  int d1() const { return d1_; }
  int d2() const { return d2_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  const std::string& name() const { return name_; }
  bool closed_form() const { return closed_form_; }

  /// order 0, 1 or 2; throws DomainError outside [1/2, 1].
  TensorValues evaluate(double t, int order) const;
  Jet t1(double t) const;
  Jet t2(double t) const;

  /// Values on [0, 1] through the reflection t -> 1 - t.
  TensorValues evaluate_mirrored(double t) const;

 private:
  void check_domain(double t) const;

  int d1_;
  int d2_;
  double alpha_;
  double beta_;
  JetFunction t1_;
  JetFunction t2_;
  std::string name_;
  bool closed_form_;
};

double sin_pi(double x);
double cos_pi(double x);

PrescribedTensor builtin_round_product(int d1, int d2);
PrescribedTensor builtin_perturbed_family(int d1, int d2, double kappa);

/// Clamped cubic spline with zero end slopes, on a strictly increasing table.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> x, std::vector<double> y);
  Jet operator()(double t) const;

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;
};

/// Rows t,T1,T2 spanning exactly [0.5, 1.0].
PrescribedTensor tensor_from_table(int d1, int d2, double alpha, double beta,
                                   const std::vector<double>& t, const std::vector<double>& t1,
                                   const std::vector<double>& t2, std::string name);
PrescribedTensor ingest_spline_csv(const std::string& path, int d1, int d2, double alpha,
                                   double beta);

/// Arclength reparametrisation for a general T0 dt^2 term.
/// The new tensor is divided by 4 L^2, with L the half-domain arclength, so that T0 == 1.
PrescribedTensor reparametrize_to_unit_T0(const PrescribedTensor& base, JetFunction t0,
                                          int grid_n);

bool t2_is_constant(const PrescribedTensor& T, int grid_n = 2048, double rel_tol = 1e-12);

struct ValidationCondition {
  std::string name;
  std::vector<double> values;
  bool pass = false;
};

struct ValidationReport {
  std::vector<ValidationCondition> conditions;
  bool pass = false;
  const ValidationCondition* first_failure() const;
};

ValidationReport validate(const PrescribedTensor& T, int grid_n = 2048);

/// Integral of T2 over [1/2, 1].
double integrate_t2(const PrescribedTensor& T);

}  // namespace ricciwarp
