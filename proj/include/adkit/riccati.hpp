#pragma once

// Riccati flow of the Fourier-Laplace exponent
//
//   K' = (rho11^2/2) K^2 - (b - i rho11 beta_t) K - i kappa^T v_t
//        - (1/2) vec(S)^T (v_t (x) v_t) - (1/2) beta_t^2,      K_0 = u1,
//
// with v_t = e^{-t theta^T} mu, beta_t = rho_J1^T v_t, S = rho_JJ rho_JJ^T,
// and the stationary transform
//
//   E exp(-lambda Y_inf + i mu^T X_inf) = exp(a int_0^inf K_s ds + i mu^T theta^{-1} m).

#include <optional>
#include <vector>

#include "adkit/model.hpp"

namespace adkit {

struct FLArgument {
  double lambda = 0.0;  // u1 = -lambda, lambda >= 0
  Vec mu;
};

struct TailBound {
  double c1 = 0.0;
  double c2 = 0.0;
};

struct RiccatiSolution {
  std::vector<double> times;
  std::vector<Complex> values;
  Complex integral{0.0, 0.0};
  std::optional<TailBound> tail_bound;

  Complex final_value() const { return values.back(); }
};

/// Reference evaluation with explicit matrix exponentials and Kronecker
/// products; the solvers use an equivalent modal form.
Complex riccati_rhs(const ModelSpec& spec, double t, Complex k, const FLArgument& arg);

/// Flow from K_0 = -lambda up to horizon T. Attaches the tail bound when
/// the spec is subcritical.
RiccatiSolution solve_riccati(const ModelSpec& spec, const FLArgument& arg,
                              double horizon, double tol = 1e-10);

/// Same flow from an arbitrary complex start K_0 = u1. For Re u1 <= 0 the
/// flow stays in the closed left half-plane; for Re u1 > 0 it may explode
/// in finite time, which is reported as NumericalError.
RiccatiSolution solve_riccati(const ModelSpec& spec, Complex u1, const Vec& mu,
                              double horizon, double tol = 1e-10);

/// |K_t| <= c1 exp(-c2 t) for all t >= 0. Requires b > 0 and theta
/// positive definite.
TailBound tail_bound(const ModelSpec& spec, const FLArgument& arg);

/// Horizon beyond which the neglected part of a int K is below tol.
double truncation_horizon(const ModelSpec& spec, const FLArgument& arg, double tol);

Complex stationary_cf(const ModelSpec& spec, const FLArgument& arg, double tol = 1e-10);

/// E exp(u1 Y_inf + i mu^T X_inf) for complex u1 with Re u1 <= 0.
Complex stationary_transform(const ModelSpec& spec, Complex u1, const Vec& mu,
                             double tol = 1e-10);

struct PsiFlow {
  std::vector<double> times;
  std::vector<Complex> psi1;
  CVec psi2;  // at the final time
  CVec psi3;  // at the final time
};

/// psi2(t) = e^{-t theta^T} u2, psi3(t) = e^{-t (theta^T (+) theta^T)} u3 and
///   psi1' = (rho11^2/2) psi1^2 - b psi1 + kappa^T psi2 + vec(S)^T psi3.
/// Requires rho_J1 = 0.
PsiFlow psi_system(const ModelSpec& spec, Complex u1, const CVec& u2, const CVec& u3,
                   double horizon, double tol = 1e-10);

/// e^{-t theta^T} and e^{-t (theta^T (+) theta^T)} in closed form.
Mat decay_matrix(const ModelSpec& spec, double t);
Mat decay_matrix_kron(const ModelSpec& spec, double t);

}  // namespace adkit
