#include "adkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace adkit {

namespace {

bool near_zero(double v) { return std::abs(v) <= kSpectrumTol; }

// int_0^t e^{-lambda (t - s)} ds
double decay_integral(double lambda, double t) {
  if (near_zero(lambda)) return t;
  return -std::expm1(-lambda * t) / lambda;
}

// int_0^t e^{-lambda (t - s)} e^{-b s} ds
double mixed_decay_integral(double lambda, double b, double t) {
  return std::exp(-b * t) * decay_integral(lambda - b, t);
}

// int_0^t e^{-lambda (t - s)} E(Y_s) ds for E(Y_s) = ey0 e^{-bs} + a phi(b, s)
double mean_y_convolution(double lambda, double a, double b, double ey0,
                          double t) {
  double drift_part;
  if (near_zero(b)) {
    // phi(0, s) = s
    drift_part = near_zero(lambda) ? 0.5 * t * t
                                   : (t - decay_integral(lambda, t)) / lambda;
  } else {
    drift_part =
        (decay_integral(lambda, t) - mixed_decay_integral(lambda, b, t)) / b;
  }
  return ey0 * mixed_decay_integral(lambda, b, t) + a * drift_part;
}

}  // namespace

std::vector<Violation> validate(const ModelSpec& spec) {
  std::vector<Violation> out;
  auto add = [&](std::string code, std::string message) {
    out.push_back({std::move(code), std::move(message)});
  };

  if (spec.n < 1) {
    add("dimension", "n must be at least 1");
    return out;
  }
  const Eigen::Index n = spec.n, d = spec.n + 1;
  if (spec.m.size() != n) add("shape_m", "m must have n entries");
  if (spec.kappa.size() != n) add("shape_kappa", "kappa must have n entries");
  if (spec.x0.size() != n) add("shape_x0", "x0 must have n entries");
  if (spec.theta.rows() != n || spec.theta.cols() != n) {
    add("shape_theta", "theta must be n x n");
  }
  if (spec.rho.rows() != d || spec.rho.cols() != d) {
    add("shape_rho", "rho must be (n+1) x (n+1)");
  }
  if (!out.empty()) return out;

  const bool finite = std::isfinite(spec.a) && std::isfinite(spec.b) &&
                      std::isfinite(spec.y0) && spec.m.allFinite() &&
                      spec.kappa.allFinite() && spec.theta.allFinite() &&
                      spec.rho.allFinite() && spec.x0.allFinite();
  if (!finite) {
    add("non_finite", "all parameters must be finite");
    return out;
  }

  if (!(spec.a > 0.0)) add("a_nonpositive", "a must be positive");
  if (!(spec.y0 > 0.0)) add("y0_nonpositive", "y0 must be positive");

  bool rho_ok = true;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      if (spec.rho(i, j) != 0.0) rho_ok = false;
    }
  }
  if (!rho_ok) add("rho_not_lower_triangular", "rho must be lower triangular");
  if ((spec.rho.diagonal().array() <= 0.0).any()) {
    add("rho_diagonal_nonpositive", "rho must have a strictly positive diagonal");
    rho_ok = false;
  }
  if (rho_ok) {
    try {
      (void)cholesky(spec.diffusion());
    } catch (const NumericalError&) {
      add("rho_not_positive_definite", "rho rho^T must be positive definite");
    }
  }

  try {
    const Spectrum sp = spectrum(spec.theta);
    const double lo = sp.min(), hi = sp.max();
    const bool all_pos = lo > kSpectrumTol;
    const bool all_neg = hi < -kSpectrumTol;
    const bool all_zero = near_zero(lo) && near_zero(hi);
    if (!(all_pos || all_neg || all_zero)) {
      add("theta_mixed_sign", "theta spectrum must have uniform sign");
    }
    const auto equals_b = [&](double v) { return std::abs(v - spec.b) <= kSpectrumTol; };
    const long hits = std::count_if(sp.eigenvalues.begin(), sp.eigenvalues.end(), equals_b);
    if (hits != 0 && hits != n) {
      add("theta_partially_equal_b",
          "theta eigenvalues must be all different from b or all equal to b");
    }
  } catch (const ValidationError& e) {
    add("theta_not_diagonalizable",
        std::string("theta must be real diagonalizable: ") + e.what());
  }
  return out;
}

void require_valid(const ModelSpec& spec) {
  const auto violations = validate(spec);
  if (violations.empty()) return;
  std::ostringstream msg;
  msg << "invalid model spec:";
  for (const auto& v : violations) msg << " [" << v.code << "] " << v.message << ";";
  throw ValidationError(msg.str());
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::Subcritical: return "subcritical";
    case Regime::Critical: return "critical";
    case Regime::Supercritical: return "supercritical";
  }
  return "unknown";
}

RegimeClass classify(const ModelSpec& spec) {
  require_valid(spec);
  const Spectrum sp = spectrum(spec.theta);
  RegimeClass out{Regime::Critical, spec.b, sp.min(), sp.max()};
  const bool b_zero = near_zero(spec.b);
  const bool theta_zero = near_zero(sp.min()) && near_zero(sp.max());
  if (!b_zero && spec.b > 0 && sp.min() > kSpectrumTol) {
    out.label = Regime::Subcritical;
  } else if ((spec.b >= -kSpectrumTol && theta_zero) ||
             (b_zero && sp.min() > kSpectrumTol)) {
    out.label = Regime::Critical;
  } else if (std::min(spec.b, sp.max()) < -kSpectrumTol) {
    out.label = Regime::Supercritical;
  } else {
    throw ValidationError("classify: parameters fall outside the three regimes");
  }
  return out;
}

double mean_y(const ModelSpec& spec, double t, double ey0) {
  if (t < 0) throw ValidationError("mean_y: t must be nonnegative");
  return ey0 * std::exp(-spec.b * t) + spec.a * decay_integral(spec.b, t);
}

Vec mean_x(const ModelSpec& spec, double t, double ey0, const Vec& ex0) {
  if (t < 0) throw ValidationError("mean_x: t must be nonnegative");
  require_valid(spec);
  // Modal coordinates decouple the linear system; each mode is a scalar
  // linear ODE driven by m and E(Y_s).
  const Spectrum sp = spectrum(spec.theta);
  const Vec xi0 = sp.inverse_modal * ex0;
  const Vec m_modal = sp.inverse_modal * spec.m;
  const Vec kappa_modal = sp.inverse_modal * spec.kappa;
  Vec xi(spec.n);
  for (int k = 0; k < spec.n; ++k) {
    const double lambda = sp.eigenvalues(k);
    xi(k) = std::exp(-lambda * t) * xi0(k) + m_modal(k) * decay_integral(lambda, t) -
            kappa_modal(k) * mean_y_convolution(lambda, spec.a, spec.b, ey0, t);
  }
  return sp.modal * xi;
}

StationaryMoments stationary_moments(const ModelSpec& spec) {
  if (!(spec.b > 0)) {
    throw ValidationError("stationary_moments: requires b > 0");
  }
  const double s1 = spec.sigma_sq(0);
  if (!(spec.a > 0.5 * s1)) {
    throw ValidationError(
        "stationary_moments: requires a > sigma_1^2 / 2 for a finite E(1/Y)");
  }
  return {spec.a / spec.b, 2.0 * spec.b / (2.0 * spec.a - s1)};
}

ModelSpec decouple(const ModelSpec& spec) {
  require_valid(spec);
  ModelSpec out = spec;
  const double r11 = spec.rho11();
  const Vec rj1 = spec.rho_j1();
  const Mat shift = spec.b * Mat::Identity(spec.n, spec.n) - spec.theta;
  out.m = spec.m - (spec.a / r11) * rj1;
  out.kappa = spec.kappa - (1.0 / r11) * (shift * rj1);
  out.x0 = spec.x0 - (spec.y0 / r11) * rj1;
  out.rho.col(0).tail(spec.n).setZero();
  return out;
}

LyapunovCertificate lyapunov_certificate(const ModelSpec& spec,
                                         std::optional<double> c,
                                         std::optional<double> r) {
  require_valid(spec);
  if (!(spec.b > 0)) throw ValidationError("lyapunov_certificate: requires b > 0");
  // x^T theta x >= lambda ||x||^2 needs the symmetric part; for symmetric
  // theta this is lambda_min(theta).
  const double lambda = symmetric_part_min_eigenvalue(spec.theta);
  if (!(lambda > 0)) {
    throw ValidationError(
        "lyapunov_certificate: the symmetric part of theta must be positive "
        "definite");
  }

  LyapunovCertificate cert;
  cert.lambda_theta = lambda;
  cert.c_upper = 2.0 * std::min(lambda, spec.b);
  cert.c = c.value_or(std::min(lambda, spec.b));
  if (!(cert.c > 0 && cert.c < cert.c_upper)) {
    throw ValidationError("lyapunov_certificate: c must lie in (0, " +
                          std::to_string(cert.c_upper) + ")");
  }

  const double kappa_sq = spec.kappa.squaredNorm();  // lambda_max(kappa kappa^T)
  if (kappa_sq > 0) {
    cert.r_upper = (2.0 * lambda - cert.c) * (2.0 * spec.b - cert.c) / kappa_sq;
  }
  cert.r = r.value_or(cert.r_upper ? 0.5 * *cert.r_upper : 1.0);
  if (!(cert.r > 0) || (cert.r_upper && !(cert.r < *cert.r_upper))) {
    throw ValidationError("lyapunov_certificate: r outside its admissible interval");
  }

  const Mat diffusion = spec.diffusion();
  const double trace_x = diffusion.bottomRightCorner(spec.n, spec.n).trace();
  const int n = spec.n;
  cert.c1 = diffusion(0, 0) + cert.r * trace_x + 2.0 * spec.a;
  cert.c2 = 2.0 * spec.b - cert.c;
  cert.c3 = cert.r * (2.0 * lambda - cert.c) * Mat::Identity(n, n) -
            (cert.r * cert.r / cert.c2) * spec.kappa * spec.kappa.transpose();
  cert.c4 = 2.0 * cert.r * spec.m - cert.r * (cert.c1 / cert.c2) * spec.kappa;
  const Vec c3_inv_c4 = cert.c3.llt().solve(cert.c4);
  cert.d = cert.c1 * cert.c1 / (4.0 * cert.c2) + 0.25 * cert.c4.dot(c3_inv_c4);
  return cert;
}

double lyapunov_function(double r, double y, const Vec& x) {
  return y * y + r * x.squaredNorm();
}

double generator_apply(const ModelSpec& spec, double r, double y, const Vec& x) {
  const Vec drift_x = spec.m - spec.kappa * y - spec.theta * x;
  const Mat diffusion = spec.diffusion();
  // Hess V = diag(2, 2r I); (1/2) y tr(rho rho^T Hess V).
  const double second_order =
      y * (diffusion(0, 0) + r * diffusion.bottomRightCorner(spec.n, spec.n).trace());
  return 2.0 * y * (spec.a - spec.b * y) + 2.0 * r * x.dot(drift_x) + second_order;
}

DriftCheck check_drift_condition(const ModelSpec& spec, const LyapunovCertificate& cert,
                                 double y_max, double x_min, double x_max, int points) {
  require_valid(spec);
  if (points < 2 || !(y_max > 0) || !(x_max > x_min)) {
    throw ValidationError("drift check: need points >= 2, y_max > 0 and x_max > x_min");
  }
  const double total = std::pow(double(points), double(spec.n + 1));
  if (total > 1e8) throw ValidationError("drift check: lattice exceeds 1e8 nodes");
  auto node = [&](double lo, double hi, int k) { return lo + (hi - lo) * k / (points - 1); };

  DriftCheck out;
  out.worst_excess = -std::numeric_limits<double>::infinity();
  std::vector<int> idx(spec.n, 0);
  Vec x(spec.n);
  for (;;) {
    for (int i = 0; i < spec.n; ++i) x(i) = node(x_min, x_max, idx[i]);
    for (int k = 0; k < points; ++k) {
      const double y = node(0.0, y_max, k);
      const double excess = generator_apply(spec, cert.r, y, x) +
                            cert.c * lyapunov_function(cert.r, y, x) - cert.d;
      ++out.points;
      if (excess > 0) ++out.violations;
      out.worst_excess = std::max(out.worst_excess, excess);
    }
    int i = 0;
    while (i < spec.n && ++idx[i] == points) idx[i++] = 0;
    if (i == spec.n) break;
  }
  return out;
}

ModelSpec reference_subcritical_spec() {
  ModelSpec s;
  s.n = 1;
  s.a = 2.0;
  s.b = 1.0;
  s.m = Vec::Constant(1, 0.5);
  s.kappa = Vec::Constant(1, 0.5);
  s.theta = Mat::Constant(1, 1, 1.0);
  s.rho = Mat::Identity(2, 2);
  s.y0 = 1.0;
  s.x0 = Vec::Zero(1);
  return s;
}

ModelSpec reference_supercritical_spec() {
  ModelSpec s = reference_subcritical_spec();
  s.b = -1.0;
  s.m = Vec::Constant(1, 1.0);
  s.kappa = Vec::Constant(1, -0.5);
  s.theta = Mat::Constant(1, 1, -2.0);
  return s;
}

}  // namespace adkit
