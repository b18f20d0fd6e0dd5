#pragma once

// Hand-rolled generators for property tests.

#include <random>

#include "adkit/model.hpp"

namespace adkit::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  double normal() { return std::normal_distribution<double>()(eng_); }

  Mat mat(Eigen::Index r, Eigen::Index c, double scale = 1.0) {
    Mat m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = scale * uniform(-1, 1);
    return m;
  }
  Vec vec(Eigen::Index n, double scale = 1.0) { return mat(n, 1, scale); }

  Mat lower_positive(Eigen::Index d) {
    Mat l = mat(d, d).triangularView<Eigen::Lower>();
    for (Eigen::Index i = 0; i < d; ++i) l(i, i) = uniform(0.5, 1.5);
    return l;
  }

  /// Real diagonalizable matrix with the given eigenvalues and a well
  /// conditioned (possibly non-orthogonal) modal matrix.
  Mat with_eigenvalues(const Vec& eigenvalues, bool symmetric) {
    const Eigen::Index n = eigenvalues.size();
    if (symmetric) {
      Eigen::HouseholderQR<Mat> qr(mat(n, n));
      const Mat q = qr.householderQ();
      return q * eigenvalues.asDiagonal() * q.transpose();
    }
    const Mat p = Mat::Identity(n, n) + 0.3 * mat(n, n);
    return p * eigenvalues.asDiagonal() * p.inverse();
  }

  /// Random admissible spec; theta_sign in {+1, -1, 0}.
  ModelSpec spec(int n, double b, int theta_sign, bool symmetric_theta = true,
                 bool decoupled = false) {
    ModelSpec s;
    s.n = n;
    s.rho = lower_positive(n + 1);
    if (decoupled) s.rho.col(0).tail(n).setZero();
    s.a = s.rho(0, 0) * s.rho(0, 0) * uniform(0.75, 2.0);  // a > sigma_1^2 / 2
    s.b = b;
    s.m = vec(n);
    s.kappa = vec(n);
    Vec eig(n);
    for (int i = 0; i < n; ++i) eig(i) = theta_sign * uniform(0.5, 2.0);
    s.theta = theta_sign == 0 ? Mat::Zero(n, n) : with_eigenvalues(eig, symmetric_theta);
    s.y0 = uniform(0.2, 3.0);
    s.x0 = vec(n);
    return s;
  }

  ModelSpec subcritical(int n, bool symmetric_theta = true, bool decoupled = false) {
    return spec(n, uniform(0.5, 2.0), +1, symmetric_theta, decoupled);
  }

 private:
  std::mt19937_64 eng_;
};

inline double max_abs(const Mat& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace adkit::testing
