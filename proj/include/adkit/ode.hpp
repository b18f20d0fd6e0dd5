#pragma once

// Adaptive Dormand-Prince 5(4) for real systems y' = f(t, y). Complex
// problems are passed as stacked (re, im) pairs.

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "adkit/matrix_kit.hpp"

namespace adkit {

struct OdeOptions {
  /// Per-step local error bound, used as both absolute and relative tolerance.
  double tol = 1e-10;
  double initial_step = 1e-3;
  std::size_t max_steps = 10'000'000;
};

/// Integrates from t0 to t1 > t0, calling observe(t, y) at t0 and after
/// every accepted step (the last call is at exactly t1). Throws
/// NumericalError on step-size underflow or a non-finite state.
template <typename Rhs, typename Observer>
Vec integrate_dopri(Rhs&& f, double t0, double t1, Vec y, const OdeOptions& opt,
                    Observer&& observe) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b - b_hat, the embedded error weights
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  observe(t0, y);
  if (!(t1 > t0)) return y;
  double t = t0;
  double h = std::min(opt.initial_step, t1 - t0);
  Vec k1 = f(t, y), k2, k3, k4, k5, k6, k7, y_new, err;
  for (std::size_t n = 0; t < t1; ++n) {
    if (n >= opt.max_steps) throw NumericalError("ode: step budget exhausted");
    const bool last = t + h >= t1;
    if (last) h = t1 - t;
    k2 = f(t + c2 * h, y + h * (a21 * k1));
    k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    k7 = f(t + h, y_new);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double ratio = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double scale = opt.tol * (1.0 + std::max(std::abs(y(i)), std::abs(y_new(i))));
      ratio = std::max(ratio, std::abs(err(i)) / scale);
    }
    if (!std::isfinite(ratio)) ratio = 1e10;
    if (ratio <= 1.0) {
      t = last ? t1 : t + h;
      y = y_new;
      k1 = k7;  // first-same-as-last
      if (!y.allFinite()) throw NumericalError("ode: non-finite state");
      observe(t, y);
    }
    const double factor = ratio == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 5.0);
    h *= factor;
    if (t < t1 && h <= 1e-14 * std::max(1.0, std::abs(t))) {
      throw NumericalError("ode: step-size underflow at t = " + std::to_string(t));
    }
  }
  return y;
}

}  // namespace adkit
