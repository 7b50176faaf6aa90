#pragma once

// Damped Newton iteration with a central-difference Jacobian and box projection.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <future>
#include <optional>
#include <vector>

namespace ricciwarp {

template <int N>
using NVec = Eigen::Matrix<double, N, 1>;

struct NewtonOptions {
  int max_iters = 50;
  double fd_step = 1e-6;   // relative
  double f_tol = 1e-10;    // on max |F_i|
  double step_tol = 1e-13; // relative full-step size
  int max_halvings = 12;
  int max_fd_shrinks = 3;
  bool parallel = true;
};

template <int N>
struct NewtonResult {
  NVec<N> x;
  NVec<N> f;
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
};

/// F returns nullopt where the residual cannot be evaluated. lo/hi bound the iterate.
template <int N, class F>
NewtonResult<N> damped_newton(F&& fun, NVec<N> x, const NVec<N>& lo, const NVec<N>& hi,
                              const NewtonOptions& opt) {
  auto project = [&](NVec<N> v) {
    for (int i = 0; i < N; ++i) v(i) = std::clamp(v(i), lo(i), hi(i));
    return v;
  };
  auto norm = [](const NVec<N>& v) { return v.cwiseAbs().maxCoeff(); };

  NewtonResult<N> res;
  x = project(x);
  auto f0 = fun(x);
  ++res.evaluations;
  res.x = x;
  if (!f0) return res;
  res.f = *f0;
  for (res.iterations = 0; res.iterations < opt.max_iters; ++res.iterations) {
    if (norm(res.f) <= opt.f_tol) {
      res.converged = true;
      return res;
    }
    // Jacobian columns; a frozen coordinate (lo == hi) gets an identity column.
    Eigen::Matrix<double, N, N> J;
    std::vector<int> free;
    for (int i = 0; i < N; ++i) {
      if (hi(i) > lo(i)) free.push_back(i);
      else J.col(i) = NVec<N>::Unit(i);
    }
    auto column = [&](int i) -> std::optional<NVec<N>> {
      double h = opt.fd_step * std::max(std::fabs(x(i)), 1e-8);
      std::optional<NVec<N>> best;
      for (int k = 0; k <= opt.max_fd_shrinks; ++k, h *= 0.1) {
        NVec<N> xp = x, xm = x;
        xp(i) = std::min(x(i) + h, hi(i));
        xm(i) = std::max(x(i) - h, lo(i));
        const auto fp = fun(xp);
        const auto fm = fun(xm);
        if (!fp || !fm) continue;
        const NVec<N> fwd = (*fp - res.f) / (xp(i) - x(i) == 0 ? 1.0 : xp(i) - x(i));
        const NVec<N> bwd = (res.f - *fm) / (x(i) - xm(i) == 0 ? 1.0 : x(i) - xm(i));
        best = (*fp - *fm) / (xp(i) - xm(i));
        if (xp(i) == x(i) || xm(i) == x(i)) break;
        if ((fwd - bwd).cwiseAbs().maxCoeff() <= 0.1 * std::max(fwd.cwiseAbs().maxCoeff(), 1e-300))
          break;
      }
      return best;
    };
    std::vector<std::optional<NVec<N>>> cols(free.size());
    if (opt.parallel && free.size() > 1) {
      std::vector<std::future<std::optional<NVec<N>>>> jobs;
      for (int i : free) jobs.push_back(std::async(std::launch::async, column, i));
      for (std::size_t k = 0; k < jobs.size(); ++k) cols[k] = jobs[k].get();
    } else {
      for (std::size_t k = 0; k < free.size(); ++k) cols[k] = column(free[k]);
    }
    for (std::size_t k = 0; k < free.size(); ++k) {
      if (!cols[k]) return res;
      J.col(free[k]) = *cols[k];
      res.evaluations += 2;
    }
    NVec<N> dx = J.fullPivLu().solve(-res.f);
    for (int i = 0; i < N; ++i)
      if (!(hi(i) > lo(i))) dx(i) = 0.0;
    if (!dx.allFinite()) return res;

    bool moved = false;
    double lambda = 1.0;
    for (int k = 0; k <= opt.max_halvings; ++k, lambda *= 0.5) {
      const NVec<N> trial = project(x + lambda * dx);
      const auto ft = fun(trial);
      ++res.evaluations;
      if (ft && ft->allFinite() && norm(*ft) < norm(res.f)) {
        const double rel = ((trial - x).cwiseAbs().array() /
                            x.cwiseAbs().array().max(1e-300)).maxCoeff();
        x = trial;
        res.x = x;
        res.f = *ft;
        moved = true;
        if (lambda == 1.0 && rel <= opt.step_tol) {
          res.converged = true;
          ++res.iterations;
          return res;
        }
        break;
      }
    }
    if (!moved) {
      const double rel =
          (dx.cwiseAbs().array() / x.cwiseAbs().array().max(1e-300)).maxCoeff();
      res.converged = rel <= opt.step_tol;
      return res;
    }
  }
  res.converged = norm(res.f) <= opt.f_tol;
  return res;
}

}  // namespace ricciwarp
