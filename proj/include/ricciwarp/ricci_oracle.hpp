#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <vector>

#include "ricciwarp/profile.hpp"
#include "ricciwarp/tensor.hpp"

namespace ricciwarp {

struct ResidualReport {
  std::vector<double> t;
  std::vector<double> r0, r1, r2, sigma;
  double sup_r0 = 0.0;
  double sup_r1 = 0.0;
  double sup_r2 = 0.0;
  double sigma_max_dev = 0.0;
  double grid_spacing = 0.0;
  std::size_t grid_n = 0;
  bool analytic = false;
};

struct ResidualWindow {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

/// Pointwise residuals of the three Ricci equations with fourth-order central stencils
/// (or supplied analytic derivatives) at interior grid points inside the window.
ResidualReport ricci_residuals(const MetricProfile& m, const PrescribedTensor& T, double c1,
                               double c2, ResidualWindow window = {});

/// Observed order log2(|r_coarse| / |r_fine|) per equation over common points.
/// Entries are NaN when both sup-norms sit at the rounding floor.
std::array<double, 3> convergence_order(const MetricProfile& fine, const MetricProfile& coarse,
                                        const PrescribedTensor& T, double c1, double c2,
                                        ResidualWindow window = {});

}  // namespace ricciwarp
