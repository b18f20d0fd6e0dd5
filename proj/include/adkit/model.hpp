#pragma once

// AD(1,n) model parameters and the analytic facts that follow from them:
// admissibility, regime, first moments, stationary moments of the CIR
// factor, the rho_J1-decoupling change of variables and the
// Foster-Lyapunov drift certificate for V(y,x) = y^2 + r ||x||^2.
//
//   dY = (a - b Y) dt + rho11 sqrt(Y) dB^1
//   dX = (m - kappa Y - theta X) dt + sqrt(Y) [rho_J1 rho_JJ] dB

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adkit/matrix_kit.hpp"

namespace adkit {

/// Tolerance for "eigenvalue equals 0", "eigenvalue equals b" and "b equals
/// 0" decisions.
inline constexpr double kSpectrumTol = 1e-9;

struct ModelSpec {
  int n = 1;
  double a = 0.0;
  double b = 0.0;
  Vec m;
  Vec kappa;
  Mat theta;
  Mat rho;  // d x d lower triangular, d = n + 1
  double y0 = 1.0;
  Vec x0;

  int d() const { return n + 1; }
  double rho11() const { return rho(0, 0); }
  Vec rho_j1() const { return rho.col(0).tail(n); }
  Mat rho_jj() const { return rho.bottomRightCorner(n, n); }
  /// rho rho^T, the diffusion matrix per unit of Y.
  Mat diffusion() const { return rho * rho.transpose(); }
  /// sigma_i^2 = sum_j rho_ij^2.
  double sigma_sq(int i) const { return rho.row(i).squaredNorm(); }

  bool operator==(const ModelSpec&) const = default;
};

struct Violation {
  std::string code;
  std::string message;
};

/// Every admissibility check; an empty result means the spec is valid.
std::vector<Violation> validate(const ModelSpec& spec);

/// Throws ValidationError listing the violations, if any.
void require_valid(const ModelSpec& spec);

enum class Regime { Subcritical, Critical, Supercritical };

std::string to_string(Regime regime);

struct RegimeClass {
  Regime label;
  double b;
  double lambda_min_theta;
  double lambda_max_theta;
};

RegimeClass classify(const ModelSpec& spec);

/// E(Y_t) given E(Y_0) = ey0.
double mean_y(const ModelSpec& spec, double t, double ey0);

/// E(X_t) given E(Y_0) = ey0 and E(X_0) = ex0.
Vec mean_x(const ModelSpec& spec, double t, double ey0, const Vec& ex0);

struct StationaryMoments {
  double mean_y_inf;      // E(Y_inf) = a/b
  double inv_mean_y_inf;  // E(1/Y_inf) = 2b/(2a - sigma_1^2)
};

/// Requires b > 0 and a > sigma_1^2 / 2.
StationaryMoments stationary_moments(const ModelSpec& spec);

/// The equivalent spec with rho_J1 = 0 obtained from X~ = X - (Y/rho11) rho_J1.
ModelSpec decouple(const ModelSpec& spec);

struct LyapunovCertificate {
  double c = 0.0;
  double r = 0.0;
  double d = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  Mat c3;
  Vec c4;
  /// Smallest eigenvalue of sym(theta) used in the bounds.
  double lambda_theta = 0.0;
  double c_upper = 0.0;
  /// Upper end of the admissible r interval; empty when kappa = 0.
  std::optional<double> r_upper;
};

/// Constants of the drift condition  (A V)(z) + c V(z) <= d  with
/// V(y,x) = y^2 + r ||x||^2. Omitted c and r default to c = lambda /\ b and
/// half the admissible r interval (r = 1 when the interval is unbounded).
LyapunovCertificate lyapunov_certificate(const ModelSpec& spec,
                                         std::optional<double> c = {},
                                         std::optional<double> r = {});

double lyapunov_function(double r, double y, const Vec& x);

/// Ito generator of the model applied to V(y,x) = y^2 + r ||x||^2.
double generator_apply(const ModelSpec& spec, double r, double y, const Vec& x);

struct DriftCheck {
  std::int64_t points = 0;
  std::int64_t violations = 0;
  /// max over the lattice of (A V + c V - d); <= 0 means no violation.
  double worst_excess = 0.0;
};

/// Checks (A V)(z) + c V(z) <= d on the lattice y in [0, y_max] x x in
/// [x_min, x_max]^n with `points` nodes per axis (at most 1e8 nodes).
DriftCheck check_drift_condition(const ModelSpec& spec, const LyapunovCertificate& cert,
                                 double y_max, double x_min, double x_max, int points);

/// Reference specs used throughout the tests and docs.
ModelSpec reference_subcritical_spec();
ModelSpec reference_supercritical_spec();

}  // namespace adkit
