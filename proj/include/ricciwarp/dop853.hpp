#pragma once

// Dormand-Prince 8(5,3) with PI step-size control. Steps land exactly on every requested stop.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>

namespace ricciwarp::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

struct StepControls {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0 selects the step automatically
  double max_step = 0.0;      // 0 means the whole span
  long max_steps = 2'000'000;
  double beta = 0.04;
  double safety = 0.9;
};

enum class StepStatus { Completed, Stopped, NonFinite, StepUnderflow, MaxSteps };

template <std::size_t N>
struct StepOutcome {
  StepStatus status = StepStatus::Completed;
  double x = 0.0;
  Vec<N> y{};
  long accepted = 0;
  long rejected = 0;
};

namespace detail {

struct Dop853Tableau {
  static constexpr double c2 = 0.526001519587677318785587544488e-01;
  static constexpr double c3 = 0.789002279381515978178381316732e-01;
  static constexpr double c4 = 0.118350341907227396726757197510e+00;
  static constexpr double c5 = 0.281649658092772603273242802490e+00;
  static constexpr double c6 = 0.333333333333333333333333333333e+00;
  static constexpr double c7 = 0.25e+00;
  static constexpr double c8 = 0.307692307692307692307692307692e+00;
  static constexpr double c9 = 0.651282051282051282051282051282e+00;
  static constexpr double c10 = 0.6e+00;
  static constexpr double c11 = 0.857142857142857142857142857142e+00;

  static constexpr double b1 = 5.42937341165687622380535766363e-2;
  static constexpr double b6 = 4.45031289275240888144113950566e0;
  static constexpr double b7 = 1.89151789931450038304281599044e0;
  static constexpr double b8 = -5.8012039600105847814672114227e0;
  static constexpr double b9 = 3.1116436695781989440891606237e-1;
  static constexpr double b10 = -1.52160949662516078556178806805e-1;
  static constexpr double b11 = 2.01365400804030348374776537501e-1;
  static constexpr double b12 = 4.47106157277725905176885569043e-2;

  static constexpr double bhh1 = 0.244094488188976377952755905512e+00;
  static constexpr double bhh2 = 0.733846688281611857341361741547e+00;
  static constexpr double bhh3 = 0.220588235294117647058823529412e-01;

  static constexpr double er1 = 0.1312004499419488073250102996e-01;
  static constexpr double er6 = -0.1225156446376204440720569753e+01;
  static constexpr double er7 = -0.4957589496572501915214079952e+00;
  static constexpr double er8 = 0.1664377182454986536961530415e+01;
  static constexpr double er9 = -0.3503288487499736816886487290e+00;
  static constexpr double er10 = 0.3341791187130174790297318841e+00;
  static constexpr double er11 = 0.8192320648511571246570742613e-01;
  static constexpr double er12 = -0.2235530786388629525884427845e-01;

  static constexpr double a21 = 5.26001519587677318785587544488e-2;
  static constexpr double a31 = 1.97250569845378994544595329183e-2;
  static constexpr double a32 = 5.91751709536136983633785987549e-2;
  static constexpr double a41 = 2.95875854768068491816892993775e-2;
  static constexpr double a43 = 8.87627564304205475450678981324e-2;
  static constexpr double a51 = 2.41365134159266685502369798665e-1;
  static constexpr double a53 = -8.84549479328286085344864962717e-1;
  static constexpr double a54 = 9.24834003261792003115737966543e-1;
  static constexpr double a61 = 3.7037037037037037037037037037e-2;
  static constexpr double a64 = 1.70828608729473871279604482173e-1;
  static constexpr double a65 = 1.25467687566822425016691814123e-1;
  static constexpr double a71 = 3.7109375e-2;
  static constexpr double a74 = 1.70252211019544039314978060272e-1;
  static constexpr double a75 = 6.02165389804559606850219397283e-2;
  static constexpr double a76 = -1.7578125e-2;
  static constexpr double a81 = 3.70920001185047927108779319836e-2;
  static constexpr double a84 = 1.70383925712239993810214054705e-1;
  static constexpr double a85 = 1.07262030446373284651809199168e-1;
  static constexpr double a86 = -1.53194377486244017527936158236e-2;
  static constexpr double a87 = 8.27378916381402288758473766002e-3;
  static constexpr double a91 = 6.24110958716075717114429577812e-1;
  static constexpr double a94 = -3.36089262944694129406857109825e0;
  static constexpr double a95 = -8.68219346841726006818189891453e-1;
  static constexpr double a96 = 2.75920996994467083049415600797e1;
  static constexpr double a97 = 2.01540675504778934086186788979e1;
  static constexpr double a98 = -4.34898841810699588477366255144e1;
  static constexpr double a101 = 4.77662536438264365890433908527e-1;
  static constexpr double a104 = -2.48811461997166764192642586468e0;
  static constexpr double a105 = -5.90290826836842996371446475743e-1;
  static constexpr double a106 = 2.12300514481811942347288949897e1;
  static constexpr double a107 = 1.52792336328824235832596922938e1;
  static constexpr double a108 = -3.32882109689848629194453265587e1;
  static constexpr double a109 = -2.03312017085086261358222928593e-2;
  static constexpr double a111 = -9.3714243008598732571704021658e-1;
  static constexpr double a114 = 5.18637242884406370830023853209e0;
  static constexpr double a115 = 1.09143734899672957818500254654e0;
  static constexpr double a116 = -8.14978701074692612513997267357e0;
  static constexpr double a117 = -1.85200656599969598641566180701e1;
  static constexpr double a118 = 2.27394870993505042818970056734e1;
  static constexpr double a119 = 2.49360555267965238987089396762e0;
  static constexpr double a1110 = -3.0467644718982195003823669022e0;
  static constexpr double a121 = 2.27331014751653820792359768449e0;
  static constexpr double a124 = -1.05344954667372501984066689879e1;
  static constexpr double a125 = -2.00087205822486249909675718444e0;
  static constexpr double a126 = -1.79589318631187989172765950534e1;
  static constexpr double a127 = 2.79488845294199600508499808837e1;
  static constexpr double a128 = -2.85899827713502369474065508674e0;
  static constexpr double a129 = -8.87285693353062954433549289258e0;
  static constexpr double a1210 = 1.23605671757943030647266201528e1;
  static constexpr double a1211 = 6.43392746015763530355970484046e-1;
};

template <std::size_t N>
double weighted_norm_sq(const Vec<N>& v, const Vec<N>& y, const StepControls& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double sk = c.atol + c.rtol * std::fabs(y[i]);
    s += (v[i] / sk) * (v[i] / sk);
  }
  return s;
}

template <std::size_t N>
bool all_finite(const Vec<N>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace detail

/// Integrate y' = f(x, y) from x0 through every entry of `stops` (monotone, possibly decreasing).
/// on_stop(index, x, y) fires on landing; keep_going(x, y) is checked after every accepted step.
template <std::size_t N, class Rhs, class OnStop, class Monitor>
StepOutcome<N> integrate(Rhs&& f, double x0, Vec<N> y0, std::span<const double> stops,
                         const StepControls& ctl, OnStop&& on_stop, Monitor&& keep_going) {
  using T = detail::Dop853Tableau;
  StepOutcome<N> out;
  out.x = x0;
  out.y = y0;
  if (stops.empty()) return out;
  const double x_end = stops.back();
  const double dir = x_end >= x0 ? 1.0 : -1.0;
  const double span = std::fabs(x_end - x0);
  const double hmax = ctl.max_step > 0.0 ? ctl.max_step : std::max(span, 1e-300);

  double x = x0;
  Vec<N> y = y0;
  Vec<N> k1 = f(x, y);
  if (!detail::all_finite(k1)) {
    out.status = StepStatus::NonFinite;
    return out;
  }

  double h = ctl.initial_step;
  if (h <= 0.0) {
    const double dnf = detail::weighted_norm_sq(k1, y, ctl);
    const double dny = detail::weighted_norm_sq(y, y, ctl);
    h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, hmax);
    Vec<N> y1;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + dir * h * k1[i];
    const Vec<N> f1 = f(x + dir * h, y1);
    Vec<N> diff;
    for (std::size_t i = 0; i < N; ++i) diff[i] = f1[i] - k1[i];
    const double der2 = std::sqrt(detail::weighted_norm_sq(diff, y, ctl)) / h;
    const double der12 = std::max(std::fabs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 1.0 / 8.0);
    h = std::min({100.0 * h, h1, hmax});
    if (!std::isfinite(h) || h <= 0.0) h = std::min(1e-6, hmax);
  }
  h = std::min(h, hmax);

  const double expo1 = 1.0 / 8.0 - ctl.beta * 0.2;
  double facold = 1e-4;
  bool last_rejected = false;
  std::size_t next = 0;
  while (next < stops.size() && (stops[next] - x) * dir <= 0.0) {
    on_stop(next, x, y);
    ++next;
  }

  Vec<N> k2, k3, k4, k5, k6, k7, k8, k9, k10, ytmp, ynew;
  long steps = 0;
  while (next < stops.size()) {
    if (++steps > ctl.max_steps) {
      out.status = StepStatus::MaxSteps;
      break;
    }
    const double target = stops[next];
    bool landing = false;
    const double h_free = h;
    double remaining = (target - x) * dir;
    if (remaining <= 1e-14 * std::max(1.0, std::fabs(x))) {
      // Stop coincides with the current point up to rounding.
      on_stop(next, x, y);
      ++next;
      continue;
    }
    if (h >= remaining * (1.0 - 1e-12) || h * 1.01 >= remaining) {
      h = remaining;
      landing = true;
    }
    if (h <= std::fabs(x) * 1e-15 || h < 1e-300) {
      out.status = StepStatus::StepUnderflow;
      break;
    }
    const double hs = dir * h;

    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + hs * T::a21 * k1[i];
    k2 = f(x + T::c2 * hs, ytmp);
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + hs * (T::a31 * k1[i] + T::a32 * k2[i]);
    k3 = f(x + T::c3 * hs, ytmp);
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + hs * (T::a41 * k1[i] + T::a43 * k3[i]);
    k4 = f(x + T::c4 * hs, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + hs * (T::a51 * k1[i] + T::a53 * k3[i] + T::a54 * k4[i]);
    k5 = f(x + T::c5 * hs, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + hs * (T::a61 * k1[i] + T::a64 * k4[i] + T::a65 * k5[i]);
    k6 = f(x + T::c6 * hs, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + hs * (T::a71 * k1[i] + T::a74 * k4[i] + T::a75 * k5[i] + T::a76 * k6[i]);
    k7 = f(x + T::c7 * hs, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + hs * (T::a81 * k1[i] + T::a84 * k4[i] + T::a85 * k5[i] +
                             T::a86 * k6[i] + T::a87 * k7[i]);
    k8 = f(x + T::c8 * hs, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + hs * (T::a91 * k1[i] + T::a94 * k4[i] + T::a95 * k5[i] +
                             T::a96 * k6[i] + T::a97 * k7[i] + T::a98 * k8[i]);
    k9 = f(x + T::c9 * hs, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + hs * (T::a101 * k1[i] + T::a104 * k4[i] + T::a105 * k5[i] +
                             T::a106 * k6[i] + T::a107 * k7[i] + T::a108 * k8[i] +
                             T::a109 * k9[i]);
    k10 = f(x + T::c10 * hs, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + hs * (T::a111 * k1[i] + T::a114 * k4[i] + T::a115 * k5[i] +
                             T::a116 * k6[i] + T::a117 * k7[i] + T::a118 * k8[i] +
                             T::a119 * k9[i] + T::a1110 * k10[i]);
    const Vec<N> k11 = f(x + T::c11 * hs, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + hs * (T::a121 * k1[i] + T::a124 * k4[i] + T::a125 * k5[i] +
                             T::a126 * k6[i] + T::a127 * k7[i] + T::a128 * k8[i] +
                             T::a129 * k9[i] + T::a1210 * k10[i] + T::a1211 * k11[i]);
    const Vec<N> k12 = f(x + hs, ytmp);

    Vec<N> incr;
    for (std::size_t i = 0; i < N; ++i) {
      incr[i] = T::b1 * k1[i] + T::b6 * k6[i] + T::b7 * k7[i] + T::b8 * k8[i] + T::b9 * k9[i] +
                T::b10 * k10[i] + T::b11 * k11[i] + T::b12 * k12[i];
      ynew[i] = y[i] + hs * incr[i];
    }

    double err = 0.0, err2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = ctl.atol + ctl.rtol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
      const double e3 = incr[i] - T::bhh1 * k1[i] - T::bhh2 * k9[i] - T::bhh3 * k12[i];
      const double e5 = T::er1 * k1[i] + T::er6 * k6[i] + T::er7 * k7[i] + T::er8 * k8[i] +
                        T::er9 * k9[i] + T::er10 * k10[i] + T::er11 * k11[i] + T::er12 * k12[i];
      err2 += (e3 / sk) * (e3 / sk);
      err += (e5 / sk) * (e5 / sk);
    }
    double deno = err + 0.01 * err2;
    if (deno <= 0.0) deno = 1.0;
    err = h * err * std::sqrt(1.0 / (deno * static_cast<double>(N)));
    if (!std::isfinite(err) || !detail::all_finite(ynew)) {
      // Shrink hard on non-finite trial values; give up only at step underflow.
      h *= 0.1;
      last_rejected = true;
      ++out.rejected;
      continue;
    }

    const double fac11 = std::pow(err, expo1);
    if (err <= 1.0) {
      double fac = fac11 / std::pow(facold, ctl.beta);
      fac = std::clamp(fac / ctl.safety, 1.0 / 6.0, 1.0 / 0.333);
      double hnew = h / fac;
      facold = std::max(err, 1e-4);
      const Vec<N> fnew = f(x + hs, ynew);
      x = landing ? target : x + hs;
      y = ynew;
      k1 = fnew;
      ++out.accepted;
      if (!detail::all_finite(k1)) {
        out.status = StepStatus::NonFinite;
        out.x = x;
        out.y = y;
        return out;
      }
      if (landing) {
        on_stop(next, x, y);
        ++next;
        while (next < stops.size() && (stops[next] - x) * dir <= 0.0) {
          on_stop(next, x, y);
          ++next;
        }
      }
      if (!keep_going(x, y)) {
        out.status = StepStatus::Stopped;
        out.x = x;
        out.y = y;
        return out;
      }
      if (last_rejected) hnew = std::min(hnew, h);
      if (landing && !last_rejected) hnew = std::max(hnew, h_free);
      last_rejected = false;
      h = std::min(hnew, hmax);
    } else {
      h = h / std::min(1.0 / 0.333, fac11 / ctl.safety);
      last_rejected = true;
      ++out.rejected;
    }
  }
  out.x = x;
  out.y = y;
  return out;
}

}  // namespace ricciwarp::ode
