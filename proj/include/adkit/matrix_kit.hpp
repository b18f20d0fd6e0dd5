#pragma once

// Small dense matrix algebra shared by every other module: Kronecker
// product and sum, column-stacking vec, matrix exponential, Cholesky and
// the real spectral decomposition of diagonalizable matrices.
//
// vec() stacks columns. Every Kronecker/vec expression in the project
// (mu (x) mu, vec(rho_JJ rho_JJ^T), ...) uses this single ordering.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <string>

#include "adkit/error.hpp"

namespace adkit {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Complex = std::complex<double>;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

namespace detail {
template <typename A, typename B>
using PromotedScalar =
    typename Eigen::ScalarBinaryOpTraits<typename A::Scalar,
                                         typename B::Scalar>::ReturnType;

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw ValidationError(std::string(what) + ": matrix must be square, got " +
                          std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()));
  }
}
}  // namespace detail

/// Kronecker product: block (i,j) of the result is a(i,j) * b.
template <typename DA, typename DB>
DenseMatrix<detail::PromotedScalar<DA, DB>> kron(
    const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  using Scalar = detail::PromotedScalar<DA, DB>;
  const Eigen::Index p = a.rows(), q = a.cols(), r = b.rows(), s = b.cols();
  DenseMatrix<Scalar> out(p * r, q * s);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < q; ++j) {
      out.block(i * r, j * s, r, s) =
          Scalar(a(i, j)) * b.template cast<Scalar>();
    }
  }
  return out;
}

/// Kronecker sum a (+) b = a (x) I_q + I_p (x) b.
template <typename DA, typename DB>
DenseMatrix<detail::PromotedScalar<DA, DB>> kron_sum(
    const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  using Scalar = detail::PromotedScalar<DA, DB>;
  detail::require_square(a, "kron_sum");
  detail::require_square(b, "kron_sum");
  const auto ip = DenseMatrix<Scalar>::Identity(a.rows(), a.rows());
  const auto iq = DenseMatrix<Scalar>::Identity(b.rows(), b.rows());
  return kron(a.template cast<Scalar>(), iq) +
         kron(ip, b.template cast<Scalar>());
}

/// Stacks the columns of a into one column vector.
template <typename Derived>
DenseVector<typename Derived::Scalar> vec(const Eigen::MatrixBase<Derived>& a) {
  DenseVector<typename Derived::Scalar> out(a.size());
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) out(k++) = a(i, j);
  }
  return out;
}

/// Inverse of vec(): refills a rows x cols matrix column by column.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> unvec(const Eigen::MatrixBase<Derived>& v,
                                            Eigen::Index rows,
                                            Eigen::Index cols) {
  if (v.cols() != 1 || rows < 1 || cols < 1 || v.rows() != rows * cols) {
    throw ValidationError("unvec: length " + std::to_string(v.size()) +
                          " does not match " + std::to_string(rows) + "x" +
                          std::to_string(cols));
  }
  DenseMatrix<typename Derived::Scalar> out(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = v(k++);
  }
  return out;
}

/// Matrix exponential (Pade scaling-and-squaring). Throws NumericalError
/// instead of returning non-finite entries.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> expm(const Eigen::MatrixBase<Derived>& a) {
  detail::require_square(a, "expm");
  if (!a.allFinite()) throw ValidationError("expm: non-finite input");
  // exp(x) overflows past ~709.8; a 1-norm far beyond that cannot produce a
  // representable result except through heavy cancellation.
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  if (norm1 > 1.0e4) {
    throw NumericalError("expm: input norm " + std::to_string(norm1) +
                         " is outside the representable range");
  }
  DenseMatrix<typename Derived::Scalar> out = a.derived().eval().exp();
  if (!out.allFinite()) {
    throw NumericalError("expm: result overflows double precision");
  }
  return out;
}

/// Raised when a Cholesky pivot is not positive; carries the order of the
/// first leading principal minor that fails.
class NotPositiveDefinite : public NumericalError {
 public:
  explicit NotPositiveDefinite(Eigen::Index minor_order)
      : NumericalError("cholesky: leading principal minor of order " +
                       std::to_string(minor_order) + " is not positive"),
        minor_order_(minor_order) {}
  Eigen::Index minor_order() const noexcept { return minor_order_; }

 private:
  Eigen::Index minor_order_;
};

/// Lower-triangular L with positive diagonal and L L^T = s.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> cholesky(
    const Eigen::MatrixBase<Derived>& s) {
  using Scalar = typename Derived::Scalar;
  detail::require_square(s, "cholesky");
  if (!s.allFinite()) throw ValidationError("cholesky: non-finite input");
  const double scale = std::max(1.0, double(s.cwiseAbs().maxCoeff()));
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ValidationError("cholesky: input is not symmetric within 1e-10");
  }
  const Eigen::Index d = s.rows();
  DenseMatrix<Scalar> l = DenseMatrix<Scalar>::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    Scalar pivot = s(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > Scalar(0))) throw NotPositiveDefinite(j + 1);
    l(j, j) = std::sqrt(pivot);
    for (Eigen::Index i = j + 1; i < d; ++i) {
      l(i, j) = (s(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }
  return l;
}

/// Real spectral decomposition a = modal * diag(eigenvalues) * inverse_modal
/// with eigenvalues sorted ascending.
template <typename Scalar>
struct BasicSpectrum {
  DenseVector<Scalar> eigenvalues;
  DenseMatrix<Scalar> modal;
  DenseMatrix<Scalar> inverse_modal;

  Scalar min() const { return eigenvalues(0); }
  Scalar max() const { return eigenvalues(eigenvalues.size() - 1); }
  DenseMatrix<Scalar> reconstruct() const {
    return modal * eigenvalues.asDiagonal() * inverse_modal;
  }
  /// ||P||_2 ||P^{-1}||_2; 1 for a symmetric input.
  Scalar modal_condition() const {
    Eigen::JacobiSVD<DenseMatrix<Scalar>> p(modal), q(inverse_modal);
    return p.singularValues()(0) * q.singularValues()(0);
  }
};

using Spectrum = BasicSpectrum<double>;

/// Symmetric inputs (within 1e-10) use the self-adjoint solver; others the
/// general real solver followed by a reality check (|Im| <= 1e-9 scale).
/// Complex or defective spectra throw ValidationError.
Spectrum spectrum(const Mat& a);

/// Smallest eigenvalue of the symmetric part (a + a^T)/2, which bounds
/// x^T a x / ||x||^2 from below.
double symmetric_part_min_eigenvalue(const Mat& a);

/// 2-norm of a matrix (largest singular value).
double spectral_norm(const Mat& a);

}  // namespace adkit
