#include "adkit/estimator.hpp"

#include <cmath>

namespace adkit {

Mat lambda_matrix(double y, const Vec& x) {
  const Eigen::Index n = x.size(), d = n + 1;
  Mat out = Mat::Zero(d, d * d + 1);
  out(0, 0) = 1.0;
  out(0, 1) = -y;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index col = 2 + i * (d + 1);
    out(i + 1, col) = 1.0;
    out(i + 1, col + 1) = -y;
    out.block(i + 1, col + 2, 1, n) = -x.transpose();
  }
  return out;
}

Mat lambda_tilde(double y, const Vec& x) {
  const Eigen::Index n = x.size(), d = n + 1;
  Mat out = Mat::Zero(d, d * d - n);
  out(0, 0) = y;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index col = 1 + i * d;
    out(i + 1, col) = y;
    out.block(i + 1, col + 1, 1, n) = x.transpose();
  }
  return out;
}

Vec tau_of(const ModelSpec& spec) {
  const int n = spec.n, d = n + 1;
  Vec tau(d * d + 1);
  tau(0) = spec.a;
  tau(1) = spec.b;
  for (int i = 0; i < n; ++i) {
    const int col = 2 + i * (d + 1);
    tau(col) = spec.m(i);
    tau(col + 1) = spec.kappa(i);
    tau.segment(col + 2, n) = spec.theta.row(i).transpose();
  }
  return tau;
}

Vec tau_tilde_of(const ModelSpec& spec) {
  const int n = spec.n, d = n + 1;
  Vec out(d * d - n);
  out(0) = spec.b;
  for (int i = 0; i < n; ++i) {
    const int col = 1 + i * d;
    out(col) = spec.kappa(i);
    out.segment(col + 1, n) = spec.theta.row(i).transpose();
  }
  return out;
}

ModelSpec with_tau(const ModelSpec& spec, const Vec& tau) {
  const int n = spec.n, d = n + 1;
  if (tau.size() != d * d + 1) throw ValidationError("with_tau: tau must have d^2 + 1 entries");
  ModelSpec out = spec;
  out.a = tau(0);
  out.b = tau(1);
  for (int i = 0; i < n; ++i) {
    const int col = 2 + i * (d + 1);
    out.m(i) = tau(col);
    out.kappa(i) = tau(col + 1);
    out.theta.row(i) = tau.segment(col + 2, n).transpose();
  }
  return out;
}

std::vector<std::string> tau_labels(int n) {
  std::vector<std::string> out{"a", "b"};
  for (int i = 1; i <= n; ++i) {
    out.push_back("m" + std::to_string(i));
    out.push_back("kappa" + std::to_string(i));
    for (int j = 1; j <= n; ++j) out.push_back("theta" + std::to_string(i) + std::to_string(j));
  }
  return out;
}

std::vector<std::string> tau_tilde_labels(int n) {
  std::vector<std::string> out{"b"};
  for (int i = 1; i <= n; ++i) {
    out.push_back("kappa" + std::to_string(i));
    for (int j = 1; j <= n; ++j) out.push_back("theta" + std::to_string(i) + std::to_string(j));
  }
  return out;
}

DiffusionEstimate estimate_diffusion(const PathGrid& path) {
  path.check();
  if (path.size() < 2) throw ValidationError("estimate_diffusion: need at least 2 points");
  const int d = path.n() + 1;
  Mat qv = Mat::Zero(d, d);
  double y_integral = 0.0;
  Vec dz(d);
  for (Eigen::Index l = 0; l + 1 < path.size(); ++l) {
    dz(0) = path.y(l + 1) - path.y(l);
    dz.tail(d - 1) = (path.x.row(l + 1) - path.x.row(l)).transpose();
    qv.noalias() += dz * dz.transpose();
    y_integral += path.y(l) * (path.times(l + 1) - path.times(l));
  }
  if (!(y_integral > 0)) throw ValidationError("estimate_diffusion: int Y ds must be positive");
  DiffusionEstimate out;
  out.s_hat = qv / y_integral;
  out.s_hat = 0.5 * (out.s_hat + out.s_hat.transpose()).eval();
  try {
    out.rho_hat = cholesky(out.s_hat);
  } catch (const NotPositiveDefinite& e) {
    throw NumericalError(std::string("estimate_diffusion: degenerate path, ") + e.what());
  }
  return out;
}

namespace {

struct Sums {
  Mat info;
  Vec score;        // sum Lambda^T W dZ
  Vec drift_score;  // sum Lambda^T W c dt (restricted only)
  Vec residual;     // drift_score - score, formed before rounding
  double horizon = 0.0;
  std::int64_t skipped = 0;
};

template <typename Design>
Sums accumulate(const PathGrid& path, const Mat& rho, double horizon, Design design,
                const Vec* c) {
  path.check();
  const int n = path.n(), d = n + 1;
  if (rho.rows() != d || rho.cols() != d || !rho.allFinite()) {
    throw ValidationError("mle: rho must be a finite (n+1) x (n+1) matrix");
  }
  const Mat diffusion = rho * rho.transpose();
  Mat chol;
  try {
    chol = cholesky(Mat(0.5 * (diffusion + diffusion.transpose())));
  } catch (const NotPositiveDefinite&) {
    throw ValidationError("mle: rho rho^T must be positive definite");
  }
  const Mat diffusion_inv =
      chol.triangularView<Eigen::Lower>().transpose().solve(
          chol.triangularView<Eigen::Lower>().solve(Mat::Identity(d, d)));

  Eigen::Index last = path.size() - 1;
  if (horizon > 0) {
    const double cut = horizon + 1e-9 * std::max(1.0, horizon);
    while (last > 0 && path.times(last) > cut) --last;
  }
  if (last < 1) throw ValidationError("mle: need at least one step before the horizon");

  const Mat probe = design(path.y(0), Vec(path.x.row(0).transpose()));
  const Eigen::Index p = probe.cols();
  // Extended-precision running sums: in the supercritical regime the
  // score is a small difference of terms growing like e^{|b| T}.
  using LMat = DenseMatrix<long double>;
  using LVec = DenseVector<long double>;
  LMat info = LMat::Zero(p, p);
  LVec score = LVec::Zero(p), drift_score = LVec::Zero(p);
  Sums s;
  Vec dz(d);
  Mat lw(p, d);
  for (Eigen::Index l = 0; l < last; ++l) {
    const double y = path.y(l);
    if (y < kYFloor) {
      ++s.skipped;
      continue;
    }
    const double h = path.times(l + 1) - path.times(l);
    const Mat lam = design(y, Vec(path.x.row(l).transpose()));
    lw.noalias() = lam.transpose() * diffusion_inv;
    lw /= y;
    dz(0) = path.y(l + 1) - y;
    dz.tail(n) = (path.x.row(l + 1) - path.x.row(l)).transpose();
    info += (h * (lw * lam)).cast<long double>();
    score += (lw * dz).cast<long double>();
    if (c) drift_score += (h * (lw * *c)).cast<long double>();
  }
  if (double(s.skipped) > kMaxSkippedFraction * double(last)) {
    throw NumericalError("mle: " + std::to_string(s.skipped) + " of " + std::to_string(last) +
                         " steps fall below the Y floor 1e-10 (limit 0.1%)");
  }
  s.info = (0.5L * (info + info.transpose())).cast<double>();
  s.score = score.cast<double>();
  s.drift_score = drift_score.cast<double>();
  s.residual = (drift_score - score).cast<double>();
  s.horizon = path.times(last) - path.times(0);
  return s;
}

// Solves info * x = rhs after symmetric Jacobi scaling; the reported
// condition number is that of the scaled matrix.
Vec solve_info(const Mat& info, const Vec& rhs, double& condition) {
  const Vec diag = info.diagonal();
  if (!((diag.array() > 0).all())) {
    throw NumericalError("mle: information matrix is singular (zero diagonal entry)");
  }
  const Vec scale = diag.cwiseSqrt().cwiseInverse();
  const Mat scaled = scale.asDiagonal() * info * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat> eig(scaled, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0), hi = eig.eigenvalues()(eig.eigenvalues().size() - 1);
  condition = lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(condition <= kMaxCondition)) {
    throw NumericalError("mle: information matrix is ill-conditioned (condition number " +
                         format_double(condition) + " > 1e12)");
  }
  Mat l;
  try {
    l = cholesky(scaled);
  } catch (const NotPositiveDefinite& e) {
    throw NumericalError(std::string("mle: information matrix ") + e.what());
  }
  const Vec z = l.triangularView<Eigen::Lower>().solve(scale.cwiseProduct(rhs));
  const Vec w = l.triangularView<Eigen::Lower>().transpose().solve(z);
  return scale.cwiseProduct(w);
}

}  // namespace

MleResult mle_full(const PathGrid& path, const Mat& rho, double horizon) {
  const Sums s = accumulate(path, rho, horizon, lambda_matrix, nullptr);
  MleResult out;
  out.tau_hat = solve_info(s.info, s.score, out.condition_number);
  if (!out.tau_hat.allFinite()) throw NumericalError("mle: non-finite estimate");
  out.info_matrix = s.info;
  out.horizon = s.horizon;
  out.rho_used = rho;
  out.skipped_steps = s.skipped;
  return out;
}

RestrictedMleResult mle_restricted(const PathGrid& path, const Mat& rho, double a,
                                   const Vec& m, double horizon) {
  if (m.size() != path.n()) throw ValidationError("mle_restricted: m must have n entries");
  Vec c(path.n() + 1);
  c << a, m;
  const Sums s = accumulate(path, rho, horizon, lambda_tilde, &c);
  RestrictedMleResult out;
  out.tau_tilde_hat = solve_info(s.info, s.residual, out.condition_number);
  if (!out.tau_tilde_hat.allFinite()) throw NumericalError("mle: non-finite estimate");
  out.info_matrix = s.info;
  out.a = a;
  out.m = m;
  out.horizon = s.horizon;
  out.rho_used = rho;
  out.skipped_steps = s.skipped;
  return out;
}

Mat info_rate(const PathGrid& path, const Mat& rho, double horizon) {
  const Sums s = accumulate(path, rho, horizon, lambda_matrix, nullptr);
  return s.info / s.horizon;
}

Vec log_normalizer(const RegimeClass& regime, const ModelSpec& spec, double horizon) {
  if (!(horizon > 0)) throw ValidationError("normalizer: T must be positive");
  const int n = spec.n, d = n + 1;
  switch (regime.label) {
    case Regime::Subcritical:
      return Vec::Constant(d * d + 1, 0.5 * std::log(horizon));
    case Regime::Supercritical: {
      Vec out(d * d - n);
      const double slow = -0.5 * spec.b * horizon;
      const double fast = 0.5 * (spec.b - 2.0 * regime.lambda_min_theta) * horizon;
      out(0) = slow;
      for (int i = 0; i < n; ++i) {
        out(1 + i * d) = slow;
        out.segment(2 + i * d, n).setConstant(fast);
      }
      return out;
    }
    case Regime::Critical:
      break;
  }
  throw ValidationError("normalizer: the critical regime is unsupported");
}

Mat normalizer(const RegimeClass& regime, const ModelSpec& spec, double horizon) {
  const Vec logs = log_normalizer(regime, spec, horizon);
  const Vec diag = logs.array().exp();
  if (!diag.allFinite()) {
    throw NumericalError("normalizer: Q_T overflows; use log_normalizer");
  }
  return diag.asDiagonal();
}

Json to_json(const MleResult& r) {
  Json j;
  j["ordering"] = kOrderingTag;
  j["labels"] = tau_labels(int(r.rho_used.rows()) - 1);
  j["tau_hat"] = to_json(r.tau_hat);
  j["info_matrix"] = to_json(r.info_matrix);
  j["T"] = r.horizon;
  j["condition_number"] = r.condition_number;
  j["rho_used"] = to_json(r.rho_used);
  j["rho_source"] = r.rho_source;
  j["skipped_steps"] = r.skipped_steps;
  return j;
}

Json to_json(const RestrictedMleResult& r) {
  Json j;
  j["ordering"] = kOrderingTag;
  j["labels"] = tau_tilde_labels(int(r.rho_used.rows()) - 1);
  j["tau_tilde_hat"] = to_json(r.tau_tilde_hat);
  j["info_matrix"] = to_json(r.info_matrix);
  j["known_c"] = {{"a", r.a}, {"m", to_json(r.m)}};
  j["T"] = r.horizon;
  j["condition_number"] = r.condition_number;
  j["rho_used"] = to_json(r.rho_used);
  j["rho_source"] = r.rho_source;
  j["skipped_steps"] = r.skipped_steps;
  return j;
}

}  // namespace adkit
