#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

// Dormand-Prince 5(4) embedded pair with the standard quartic dense-output
// interpolant, plus first-crossing event location on the dense output.
// Coefficients follow the classical DOPRI5 tableau.

namespace twistorlab::detail {

template <std::size_t N>
using OdeState = std::array<double, N>;

struct RkOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-12;
  double max_step = 0.05;
  double initial_step = 0.0;  // 0 = choose automatically
  long max_steps = 200000;
};

enum class RkStop {
  ReachedTmax,   // integrated to tmax without event
  Event,         // event function crossed zero from below
  StepLimit,     // max_steps exceeded
  StepUnderflow  // step size collapsed below representable resolution
};

template <std::size_t N>
struct RkResult {
  RkStop stop = RkStop::ReachedTmax;
  double t = 0.0;
  OdeState<N> y{};
  long n_steps = 0;
};

template <std::size_t N>
struct DenseStep {
  double t0 = 0.0, h = 0.0;
  OdeState<N> r1{}, r2{}, r3{}, r4{}, r5{};

  OdeState<N> eval(double theta) const {
    const double th1 = 1.0 - theta;
    OdeState<N> out;
    for (std::size_t i = 0; i < N; ++i) {
      out[i] = r1[i] +
               theta * (r2[i] +
                        th1 * (r3[i] + theta * (r4[i] + th1 * r5[i])));
    }
    return out;
  }
};

// rhs: void(const OdeState&, OdeState&). event: double(const OdeState&),
// watched for the first crossing negative -> nonnegative. observe:
// void(double t, const OdeState&), called at the start point and after each
// accepted step (at the truncated event point for the final one).
template <std::size_t N, class Rhs, class Event, class Observer>
RkResult<N> integrate_adaptive(Rhs&& rhs, const OdeState<N>& y_init,
                               double tmax, const RkOptions& opt,
                               bool use_event, Event&& event,
                               Observer&& observe) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113,
                          a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                          a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0,
                          d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0,
                          d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0,
                          d7 = 69997945.0 / 29380423.0;

  RkResult<N> res;
  res.y = y_init;
  double t = 0.0;
  OdeState<N> y = y_init;
  OdeState<N> k1, k2, k3, k4, k5, k6, k7, ytmp, y1;
  rhs(y, k1);

  auto scaled_error = [&](const OdeState<N>& y0f, const OdeState<N>& y1f,
                          double h) {
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                            e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y0f[i]),
                                                             std::abs(y1f[i]));
      acc += (e / sc) * (e / sc);
    }
    return std::sqrt(acc / static_cast<double>(N));
  };

  double h = opt.initial_step;
  if (h <= 0.0) {
    // Crude version of the usual starting-step heuristic: balance the size
    // of the state against the size of the derivative.
    double ny = 0.0, nf = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      ny = std::max(ny, std::abs(y[i]));
      nf = std::max(nf, std::abs(k1[i]));
    }
    h = 0.01 * (ny + 1.0) / (nf + 1.0);
  }
  h = std::min(h, opt.max_step);
  h = std::min(h, tmax);

  observe(t, y);
  double g_prev = use_event ? event(y) : 0.0;
  bool rejected = false;

  while (t < tmax) {
    if (++res.n_steps > opt.max_steps) {
      res.stop = RkStop::StepLimit;
      res.t = t;
      res.y = y;
      return res;
    }
    if (h < 1e-14 * std::max(1.0, std::abs(t))) {
      res.stop = RkStop::StepUnderflow;
      res.t = t;
      res.y = y;
      return res;
    }
    const bool last = (t + h >= tmax);
    if (last) h = tmax - t;

    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    rhs(ytmp, k2);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(ytmp, k3);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(ytmp, k4);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] +
                            a54 * k4[i]);
    rhs(ytmp, k5);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                            a64 * k4[i] + a65 * k5[i]);
    rhs(ytmp, k6);
    for (std::size_t i = 0; i < N; ++i)
      y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] +
                          a75 * k5[i] + a76 * k6[i]);
    rhs(y1, k7);
    (void)c2;
    (void)c3;
    (void)c4;
    (void)c5;

    const double err = scaled_error(y, y1, h);
    if (err > 1.0) {
      const double fac =
          std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
      h *= fac;
      rejected = true;
      continue;
    }

    DenseStep<N> dense;
    dense.t0 = t;
    dense.h = h;
    for (std::size_t i = 0; i < N; ++i) {
      const double ydiff = y1[i] - y[i];
      const double bspl = h * k1[i] - ydiff;
      dense.r1[i] = y[i];
      dense.r2[i] = ydiff;
      dense.r3[i] = bspl;
      dense.r4[i] = ydiff - h * k7[i] - bspl;
      dense.r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                         d6 * k6[i] + d7 * k7[i]);
    }

    if (use_event) {
      // Subsample the dense output so that an excursion across the zero set
      // and back within one step is still caught.
      constexpr int kSub = 8;
      double th_prev = 0.0;
      for (int mx = 1; mx <= kSub; ++mx) {
        const double th = static_cast<double>(mx) / kSub;
        const OdeState<N> ys = (mx == kSub) ? y1 : dense.eval(th);
        const double g = event(ys);
        if (g_prev < 0.0 && g >= 0.0) {
          // Bisect the bracket down to the resolution of the interpolant.
          double lo = th_prev, hi = th;
          for (int it = 0; it < 80 && (hi - lo) > 1e-16; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (event(dense.eval(mid)) < 0.0) {
              lo = mid;
            } else {
              hi = mid;
            }
          }
          res.stop = RkStop::Event;
          res.t = t + hi * h;
          res.y = dense.eval(hi);
          observe(res.t, res.y);
          return res;
        }
        g_prev = g;
        th_prev = th;
      }
    }

    t += h;
    y = y1;
    k1 = k7;
    observe(t, y);
    if (t >= tmax) break;

    const double facmax = rejected ? 1.0 : 10.0;
    const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2),
                                  0.2, facmax);
    h = std::min(h * fac, opt.max_step);
    rejected = false;
  }

  res.stop = RkStop::ReachedTmax;
  res.t = t;
  res.y = y;
  return res;
}

}  // namespace twistorlab::detail
