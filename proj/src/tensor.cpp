#include "ricciwarp/tensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ricciwarp/error.hpp"

namespace ricciwarp {

namespace {

constexpr double kPi = std::numbers::pi;

// 5-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 5> kGaussNodes = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                               0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights = {0.2369268850561891, 0.4786286704993665,
                                                 0.5688888888888889, 0.4786286704993665,
                                                 0.2369268850561891};

template <class F>
double gauss5(F&& f, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double sum = 0.0;
  for (std::size_t i = 0; i < 5; ++i) sum += kGaussWeights[i] * f(mid + half * kGaussNodes[i]);
  return sum * half;
}

double sin_pi_core(double r) {  // r in [0, 1/2]
  if (r > 0.25) return std::cos(kPi * (0.5 - r));
  return std::sin(kPi * r);
}

double cos_pi_core(double r) {  // r in [0, 1/2]
  if (r > 0.25) return std::sin(kPi * (0.5 - r));
  return std::cos(kPi * r);
}

double reduce_period_two(double x) { return x - 2.0 * std::nearbyint(0.5 * x); }

}  // namespace

double sin_pi(double x) {
  double r = reduce_period_two(x);
  double sign = 1.0;
  if (r < 0.0) {
    r = -r;
    sign = -1.0;
  }
  if (r > 0.5) r = 1.0 - r;
  return sign * sin_pi_core(r);
}

double cos_pi(double x) {
  double r = std::fabs(reduce_period_two(x));
  if (r > 0.5) return -cos_pi_core(1.0 - r);
  return cos_pi_core(r);
}

PrescribedTensor::PrescribedTensor(int d1, int d2, double alpha, double beta, JetFunction t1,
                                   JetFunction t2, std::string name, bool closed_form)
    : d1_(d1),
      d2_(d2),
      alpha_(alpha),
      beta_(beta),
      t1_(std::move(t1)),
      t2_(std::move(t2)),
      name_(std::move(name)),
      closed_form_(closed_form) {
  if (d1 < 2 || d2 < 2)
    throw Error(ErrorCode::InvalidArgument, "dimensions must satisfy d1 >= 2 and d2 >= 2");
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
  if (!(beta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be non-negative");
  if (!t1_ || !t2_) throw Error(ErrorCode::InvalidArgument, "missing tensor component");
}

void PrescribedTensor::check_domain(double t) const {
  if (!(t >= 0.5 && t <= 1.0))
    throw Error(ErrorCode::DomainError, "t = " + std::to_string(t) + " outside [1/2, 1]");
}

TensorValues PrescribedTensor::evaluate(double t, int order) const {
  check_domain(t);
  const Jet a = t1_(t);
  const Jet b = t2_(t);
  switch (order) {
    case 0: return {a.value, b.value};
    case 1: return {a.first, b.first};
    case 2: return {a.second, b.second};
    default: throw Error(ErrorCode::InvalidArgument, "derivative order must be 0, 1 or 2");
  }
}

Jet PrescribedTensor::t1(double t) const {
  check_domain(t);
  return t1_(t);
}

Jet PrescribedTensor::t2(double t) const {
  check_domain(t);
  return t2_(t);
}

TensorValues PrescribedTensor::evaluate_mirrored(double t) const {
  if (!(t >= 0.0 && t <= 1.0))
    throw Error(ErrorCode::DomainError, "t = " + std::to_string(t) + " outside [0, 1]");
  return evaluate(t < 0.5 ? 1.0 - t : t, 0);
}

PrescribedTensor builtin_round_product(int d1, int d2) {
  const double pi2 = kPi * kPi;
  auto t1 = [pi2](double t) {
    const double s = sin_pi(t);
    return Jet{s * s / pi2, sin_pi(2.0 * t) / kPi, 2.0 * cos_pi(2.0 * t)};
  };
  const double t2_value = (d2 - 1.0) / (d1 * pi2);
  auto t2 = [t2_value](double) { return Jet{t2_value, 0.0, 0.0}; };
  return PrescribedTensor(d1, d2, d2 - 1.0, 0.0, t1, t2, "round_product", true);
}

PrescribedTensor builtin_perturbed_family(int d1, int d2, double kappa) {
  const double pi2 = kPi * kPi;
  auto t1 = [pi2](double t) {
    const double s = sin_pi(t);
    return Jet{s * s / pi2, sin_pi(2.0 * t) / kPi, 2.0 * cos_pi(2.0 * t)};
  };
  const double base = (d2 - 1.0) / (d1 * pi2);
  auto t2 = [base, kappa, pi2](double t) {
    const double s = sin_pi(t);
    return Jet{base * (1.0 + kappa * s * s), base * kappa * kPi * sin_pi(2.0 * t),
               base * kappa * 2.0 * pi2 * cos_pi(2.0 * t)};
  };
  return PrescribedTensor(d1, d2, d2 - 1.0, 0.0, t1, t2, "perturbed", true);
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 4 || y_.size() != n)
    throw Error(ErrorCode::InvalidArgument, "spline needs at least 4 matching samples");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "spline abscissae must be strictly increasing");

  // Clamped conditions s'(x0) = s'(xn) = 0, tridiagonal system for the second derivatives.
  std::vector<double> sub(n, 0.0), diag(n, 0.0), sup(n, 0.0), rhs(n, 0.0);
  const double h0 = x_[1] - x_[0];
  diag[0] = h0 / 3.0;
  sup[0] = h0 / 6.0;
  rhs[0] = (y_[1] - y_[0]) / h0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hl = x_[i] - x_[i - 1];
    const double hr = x_[i + 1] - x_[i];
    sub[i] = hl / 6.0;
    diag[i] = (hl + hr) / 3.0;
    sup[i] = hr / 6.0;
    rhs[i] = (y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl;
  }
  const double hn = x_[n - 1] - x_[n - 2];
  sub[n - 1] = hn / 6.0;
  diag[n - 1] = hn / 3.0;
  rhs[n - 1] = -(y_[n - 1] - y_[n - 2]) / hn;

  for (std::size_t i = 1; i < n; ++i) {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  m_.assign(n, 0.0);
  m_[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) m_[i] = (rhs[i] - sup[i] * m_[i + 1]) / diag[i];
}

Jet CubicSpline::operator()(double t) const {
  std::size_t i = static_cast<std::size_t>(
      std::upper_bound(x_.begin(), x_.end(), t) - x_.begin());
  i = std::clamp<std::size_t>(i, 1, x_.size() - 1) - 1;
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - t) / h;
  const double b = (t - x_[i]) / h;
  const double value = a * y_[i] + b * y_[i + 1] +
                       ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
  const double first = (y_[i + 1] - y_[i]) / h +
                       (-(3.0 * a * a - 1.0) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]) * h / 6.0;
  const double second = a * m_[i] + b * m_[i + 1];
  return {value, first, second};
}

PrescribedTensor tensor_from_table(int d1, int d2, double alpha, double beta,
                                   const std::vector<double>& t, const std::vector<double>& t1,
                                   const std::vector<double>& t2, std::string name) {
  if (t.size() < 4)
    throw Error(ErrorCode::InvalidArgument, "spline table needs at least 4 rows");
  if (std::fabs(t.front() - 0.5) > 1e-12 || std::fabs(t.back() - 1.0) > 1e-12)
    throw Error(ErrorCode::InvalidArgument, "spline table must span exactly [0.5, 1.0]");
  std::vector<double> x = t;
  x.front() = 0.5;
  x.back() = 1.0;
  auto s1 = std::make_shared<CubicSpline>(x, t1);
  auto s2 = std::make_shared<CubicSpline>(x, t2);
  return PrescribedTensor(
      d1, d2, alpha, beta, [s1](double s) { return (*s1)(s); },
      [s2](double s) { return (*s2)(s); }, std::move(name), false);
}

PrescribedTensor ingest_spline_csv(const std::string& path, int d1, int d2, double alpha,
                                   double beta) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open spline table " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ConfigError, "empty spline table " + path);
  line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
  if (line != "t,T1,T2")
    throw Error(ErrorCode::ConfigError, "spline table header must be t,T1,T2 in " + path);
  std::vector<double> t, a, b;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::array<double, 3> v{};
    for (std::size_t k = 0; k < 3; ++k) {
      if (!std::getline(ss, cell, ','))
        throw Error(ErrorCode::ConfigError, path + ": row " + std::to_string(row) + " malformed");
      try {
        v[k] = std::stod(cell);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigError, path + ": row " + std::to_string(row) + " malformed");
      }
    }
    t.push_back(v[0]);
    a.push_back(v[1]);
    b.push_back(v[2]);
  }
  try {
    return tensor_from_table(d1, d2, alpha, beta, t, a, b, "spline:" + path);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
}

namespace {

class ArclengthMap {
 public:
  ArclengthMap(JetFunction t0, int grid_n) : t0_(std::move(t0)) {
    if (grid_n < 2) throw Error(ErrorCode::InvalidArgument, "grid_n must be at least 2");
    nodes_.resize(grid_n + 1);
    cumulative_.resize(grid_n + 1);
    nodes_[0] = 0.5;
    cumulative_[0] = 0.0;
    for (int k = 1; k <= grid_n; ++k) {
      nodes_[k] = 0.5 + 0.5 * k / grid_n;
      cumulative_[k] = cumulative_[k - 1] + segment(nodes_[k - 1], nodes_[k]);
    }
    nodes_.back() = 1.0;
    length_ = cumulative_.back();
  }

  double length() const { return length_; }
  double speed(double t) const {
    const double v = t0_(t).value;
    if (!(v > 0.0)) throw Error(ErrorCode::DomainError, "T0 must be positive");
    return std::sqrt(v);
  }
  Jet t0(double t) const { return t0_(t); }

  /// Original t for the rescaled parameter sigma in [1/2, 1].
  double invert(double sigma) const {
    const double target = (sigma - 0.5) * 2.0 * length_;
    std::size_t k = static_cast<std::size_t>(
        std::upper_bound(cumulative_.begin(), cumulative_.end(), target) - cumulative_.begin());
    k = std::clamp<std::size_t>(k, 1, nodes_.size() - 1) - 1;
    const double lo = nodes_[k];
    const double hi = nodes_[k + 1];
    double t = std::clamp(lo + (target - cumulative_[k]) / speed(lo), lo, hi);
    for (int it = 0; it < 50; ++it) {
      const double f = cumulative_[k] + segment(lo, t) - target;
      const double step = f / speed(t);
      const double next = std::clamp(t - step, lo, hi);
      if (std::fabs(next - t) <= 1e-16) {
        t = next;
        break;
      }
      t = next;
    }
    return t;
  }

 private:
  double segment(double a, double b) const {
    if (b <= a) return 0.0;
    return gauss5([this](double x) { return speed(x); }, a, b);
  }

  JetFunction t0_;
  std::vector<double> nodes_;
  std::vector<double> cumulative_;
  double length_ = 0.0;
};

}  // namespace

PrescribedTensor reparametrize_to_unit_T0(const PrescribedTensor& base, JetFunction t0,
                                          int grid_n) {
  auto map = std::make_shared<ArclengthMap>(std::move(t0), grid_n);
  const double L = map->length();
  const double scale = 1.0 / (4.0 * L * L);
  auto compose = [map, L, scale](const JetFunction& comp) {
    return [map, L, scale, comp](double sigma) {
      const double t = map->invert(sigma);
      const Jet q = map->t0(t);
      const Jet c = comp(t);
      const double dt = 2.0 * L / std::sqrt(q.value);
      const double ddt = -2.0 * L * L * q.first / (q.value * q.value);
      return Jet{c.value * scale, c.first * dt * scale,
                 (c.second * dt * dt + c.first * ddt) * scale};
    };
  };
  auto base_ptr = std::make_shared<PrescribedTensor>(base);
  JetFunction c1 = [base_ptr](double t) { return base_ptr->t1(t); };
  JetFunction c2 = [base_ptr](double t) { return base_ptr->t2(t); };
  return PrescribedTensor(base.d1(), base.d2(), base.alpha(), base.beta(), compose(c1),
                          compose(c2), base.name() + ":unit_T0", false);
}

bool t2_is_constant(const PrescribedTensor& T, int grid_n, double rel_tol) {
  double lo = T.t2(0.5).value;
  double hi = lo;
  for (int i = 1; i <= grid_n; ++i) {
    const double v = T.t2(0.5 + 0.5 * i / grid_n).value;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return (hi - lo) <= rel_tol * std::max(std::fabs(hi), std::fabs(lo));
}

const ValidationCondition* ValidationReport::first_failure() const {
  for (const auto& c : conditions)
    if (!c.pass) return &c;
  return nullptr;
}

ValidationReport validate(const PrescribedTensor& T, int grid_n) {
  if (grid_n < 4) throw Error(ErrorCode::InvalidArgument, "grid_n must be at least 4");
  // Closed forms are held to rounding level, tabulated data to table precision.
  const double eq_tol = T.closed_form() ? 1e-14 : 1e-12;
  const double curvature_tol = T.closed_form() ? 1e-14 : 1e-6;

  std::vector<double> grid(grid_n + 1);
  for (int i = 0; i <= grid_n; ++i) grid[i] = 0.5 + 0.5 * i / grid_n;
  grid.back() = 1.0;
  std::vector<Jet> a(grid.size()), b(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    a[i] = T.t1(grid[i]);
    b[i] = T.t2(grid[i]);
  }

  double max_t1p = -INFINITY, max_t2p = -INFINITY, max_t1p_interior = -INFINITY;
  double min_t1 = INFINITY, min_t2 = INFINITY;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    max_t1p = std::max(max_t1p, a[i].first);
    max_t2p = std::max(max_t2p, b[i].first);
    if (i > 0 && i + 1 < grid.size()) max_t1p_interior = std::max(max_t1p_interior, a[i].first);
    if (i + 1 < grid.size()) min_t1 = std::min(min_t1, a[i].value);
    min_t2 = std::min(min_t2, b[i].value);
  }
  const Jet a_mid = a.front(), a_end = a.back();
  const Jet b_mid = b.front(), b_end = b.back();

  ValidationReport report;
  auto add = [&report](std::string name, std::vector<double> values, bool pass) {
    report.conditions.push_back({std::move(name), std::move(values), pass});
  };
  add("T1>0 on [1/2,1)", {min_t1}, min_t1 > 0.0);
  add("T2>0 on [1/2,1]", {min_t2}, min_t2 > 0.0);
  add("T1'<=0 on [1/2,1]", {max_t1p}, max_t1p <= eq_tol);
  add("T2'<=0 on [1/2,1]", {max_t2p}, max_t2p <= eq_tol);
  add("T1'<0 on (1/2,1)", {max_t1p_interior}, max_t1p_interior < 0.0);
  add("T1'(1/2)=0", {a_mid.first}, std::fabs(a_mid.first) <= eq_tol);
  add("T2'(1/2)=0", {b_mid.first}, std::fabs(b_mid.first) <= eq_tol);
  add("T1''(1/2)<0", {a_mid.second}, a_mid.second < 0.0);
  add("T1(1)=0", {a_end.value}, std::fabs(a_end.value) <= eq_tol);
  add("T1'(1)=0", {a_end.first}, std::fabs(a_end.first) <= eq_tol);
  add("T1''(1)=2", {a_end.second}, std::fabs(a_end.second - 2.0) <= curvature_tol);
  add("T2'(1)=0", {b_end.first}, std::fabs(b_end.first) <= eq_tol);
  add("T2(1)>0", {b_end.value}, b_end.value > 0.0);
  report.pass = std::all_of(report.conditions.begin(), report.conditions.end(),
                            [](const ValidationCondition& c) { return c.pass; });
  return report;
}

double integrate_t2(const PrescribedTensor& T) {
  constexpr int kCells = 64;
  double sum = 0.0;
  for (int k = 0; k < kCells; ++k) {
    const double lo = 0.5 + 0.5 * k / kCells;
    const double hi = 0.5 + 0.5 * (k + 1) / kCells;
    sum += gauss5([&T](double t) { return T.t2(std::min(t, 1.0)).value; }, lo, hi);
  }
  return sum;
}

}  // namespace ricciwarp
