#pragma once

#include <optional>
#include <vector>

namespace ricciwarp {

struct ProfileDerivatives {
  std::vector<double> h1, f11, f21;  // first derivatives
  std::vector<double> f12, f22;      // second derivatives
};

/// Samples of (h, f1, f2) on a uniform grid.
struct MetricProfile {
  std::vector<double> t, h, f1, f2;
  std::optional<ProfileDerivatives> analytic;

  std::size_t size() const { return t.size(); }
};

/// Extends profile samples on [1/2, 1] to [0, 1] by the reflection t -> 1 - t.
MetricProfile mirror_half_profile(const MetricProfile& half);

/// Uniform profile of the exact round product on [lo, hi] with n points.
MetricProfile round_product_profile(double lo, double hi, std::size_t n, double f1_mid = 1.0,
                                    double f2_value = 1.0, bool with_derivatives = false);

}  // namespace ricciwarp
