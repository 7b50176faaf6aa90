#include "ricciwarp/profile.hpp"

#include <cmath>
#include <numbers>

#include "ricciwarp/error.hpp"

namespace ricciwarp {

MetricProfile mirror_half_profile(const MetricProfile& half) {
  const std::size_t n = half.size();
  if (n < 2 || half.t.front() != 0.5)
    throw Error(ErrorCode::InvalidArgument, "half profile must start at t = 1/2");
  MetricProfile full;
  const std::size_t m = 2 * n - 1;
  full.t.resize(m);
  full.h.resize(m);
  full.f1.resize(m);
  full.f2.resize(m);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t up = n - 1 + i;
    const std::size_t down = n - 1 - i;
    full.t[up] = half.t[i];
    full.t[down] = 1.0 - half.t[i];
    full.h[up] = full.h[down] = half.h[i];
    full.f1[up] = full.f1[down] = half.f1[i];
    full.f2[up] = full.f2[down] = half.f2[i];
  }
  return full;
}

MetricProfile round_product_profile(double lo, double hi, std::size_t n, double f1_mid,
                                    double f2_value, bool with_derivatives) {
  constexpr double pi = std::numbers::pi;
  constexpr long double pi_l = std::numbers::pi_v<long double>;
  MetricProfile m;
  ProfileDerivatives d;
  for (std::size_t i = 0; i < n; ++i) {
    // Samples at the ideal abscissa in extended precision to keep the data at half an ulp.
    const long double tl = static_cast<long double>(lo) +
                           (static_cast<long double>(hi) - lo) * i / static_cast<long double>(n - 1);
    const long double s = std::sin(pi_l * tl);
    const long double c = std::cos(pi_l * tl);
    m.t.push_back(static_cast<double>(tl));
    m.h.push_back(pi * f1_mid);
    m.f1.push_back(static_cast<double>(f1_mid * s));
    m.f2.push_back(f2_value);
    d.h1.push_back(0.0);
    d.f11.push_back(static_cast<double>(f1_mid * pi_l * c));
    d.f12.push_back(static_cast<double>(-f1_mid * pi_l * pi_l * s));
    d.f21.push_back(0.0);
    d.f22.push_back(0.0);
  }
  if (with_derivatives) m.analytic = std::move(d);
  return m;
}

}  // namespace ricciwarp
