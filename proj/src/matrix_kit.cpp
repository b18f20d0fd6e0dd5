#include "adkit/matrix_kit.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace adkit {

namespace {

constexpr double kSymmetryTol = 1e-10;
constexpr double kImagTol = 1e-9;
constexpr double kReconstructionTol = 1e-10;

Spectrum sorted(const Vec& values, const Mat& vectors) {
  const Eigen::Index d = values.size();
  std::vector<Eigen::Index> order(d);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) {
                     return values(i) < values(j);
                   });
  Spectrum out;
  out.eigenvalues.resize(d);
  out.modal.resize(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    out.eigenvalues(k) = values(order[k]);
    out.modal.col(k) = vectors.col(order[k]);
  }
  return out;
}

}  // namespace

Spectrum spectrum(const Mat& a) {
  detail::require_square(a, "spectrum");
  if (a.rows() == 0) throw ValidationError("spectrum: empty matrix");
  if (!a.allFinite()) throw ValidationError("spectrum: non-finite input");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());

  if ((a - a.transpose()).cwiseAbs().maxCoeff() <= kSymmetryTol * scale) {
    Eigen::SelfAdjointEigenSolver<Mat> solver(0.5 * (a + a.transpose()));
    if (solver.info() != Eigen::Success) {
      throw NumericalError("spectrum: symmetric eigensolver failed");
    }
    Spectrum out = sorted(solver.eigenvalues(), solver.eigenvectors());
    out.inverse_modal = out.modal.transpose();
    return out;
  }

  Eigen::EigenSolver<Mat> solver(a);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("spectrum: eigensolver failed");
  }
  const CVec& lambda = solver.eigenvalues();
  if (lambda.imag().cwiseAbs().maxCoeff() > kImagTol * scale) {
    throw ValidationError("spectrum: matrix has complex eigenvalues");
  }
  Mat vectors = solver.eigenvectors().real();
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    const double norm = vectors.col(k).norm();
    if (norm == 0.0) throw ValidationError("spectrum: defective matrix");
    vectors.col(k) /= norm;
  }
  Spectrum out = sorted(lambda.real(), vectors);

  Eigen::FullPivLU<Mat> lu(out.modal);
  if (!lu.isInvertible() || lu.rcond() < 1e-12) {
    throw ValidationError("spectrum: matrix is defective (not diagonalizable)");
  }
  out.inverse_modal = lu.inverse();
  const double defect = (out.reconstruct() - a).norm() / std::max(a.norm(), 1e-300);
  if (defect > kReconstructionTol) {
    throw ValidationError("spectrum: matrix is defective (reconstruction error " +
                          std::to_string(defect) + ")");
  }
  return out;
}

double symmetric_part_min_eigenvalue(const Mat& a) {
  detail::require_square(a, "symmetric_part_min_eigenvalue");
  Eigen::SelfAdjointEigenSolver<Mat> solver(0.5 * (a + a.transpose()),
                                            Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

}  // namespace adkit
