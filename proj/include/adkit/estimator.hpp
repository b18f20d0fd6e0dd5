#pragma once

// Continuous-record maximum likelihood for the drift, discretized with
// left-endpoint sums. The drift is written Lambda(z) tau with
//
//   tau = (a, b, m1, kappa1, theta11..theta1n, ..., mn, kappan, thetan1..thetann)
//
// and, with a and m known, c - LambdaTilde(z) tauTilde where c = (a, m) and
//
//   tauTilde = (b, kappa1, theta11..theta1n, ..., kappan, thetan1..thetann).

#include <string>
#include <vector>

#include "adkit/model.hpp"
#include "adkit/model_io.hpp"
#include "adkit/simulator.hpp"

namespace adkit {

inline constexpr const char* kOrderingTag = "duffie-ad1n-v1";
inline constexpr double kYFloor = 1e-10;
inline constexpr double kMaxSkippedFraction = 1e-3;
inline constexpr double kMaxCondition = 1e12;

/// d x (d^2 + 1).
Mat lambda_matrix(double y, const Vec& x);
/// d x (d^2 - n).
Mat lambda_tilde(double y, const Vec& x);

Vec tau_of(const ModelSpec& spec);
Vec tau_tilde_of(const ModelSpec& spec);
/// spec with its drift parameters replaced by tau.
ModelSpec with_tau(const ModelSpec& spec, const Vec& tau);
std::vector<std::string> tau_labels(int n);
std::vector<std::string> tau_tilde_labels(int n);

struct DiffusionEstimate {
  Mat s_hat;    // estimate of rho rho^T
  Mat rho_hat;  // its Cholesky factor
};

/// Realized covariation of Z over the left-endpoint Riemann sum of Y.
DiffusionEstimate estimate_diffusion(const PathGrid& path);

struct MleResult {
  Vec tau_hat;
  Mat info_matrix;
  double horizon = 0.0;
  double condition_number = 0.0;
  Mat rho_used;
  std::string rho_source = "known";
  std::int64_t skipped_steps = 0;
};

struct RestrictedMleResult {
  Vec tau_tilde_hat;
  Mat info_matrix;
  double a = 0.0;
  Vec m;
  double horizon = 0.0;
  double condition_number = 0.0;
  Mat rho_used;
  std::string rho_source = "known";
  std::int64_t skipped_steps = 0;
};

/// Both estimators use the grid points with t <= horizon (the whole path
/// when horizon is omitted).
MleResult mle_full(const PathGrid& path, const Mat& rho, double horizon = -1.0);
RestrictedMleResult mle_restricted(const PathGrid& path, const Mat& rho, double a,
                                   const Vec& m, double horizon = -1.0);

/// info_matrix / T of the full estimator.
Mat info_rate(const PathGrid& path, const Mat& rho, double horizon = -1.0);

/// sqrt(T) I (size d^2 + 1) for subcritical specs; Q_T (size d^2 - n) for
/// supercritical ones.
Mat normalizer(const RegimeClass& regime, const ModelSpec& spec, double horizon);

/// log of the diagonal of normalizer(); finite where Q_T itself overflows.
Vec log_normalizer(const RegimeClass& regime, const ModelSpec& spec, double horizon);

Json to_json(const MleResult& r);
Json to_json(const RestrictedMleResult& r);

}  // namespace adkit
