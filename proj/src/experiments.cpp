#include "adkit/experiments.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace adkit {

namespace {

struct Functional {
  std::function<double(double, const Eigen::Ref<const Eigen::RowVectorXd>&)> f;
  bool divides_by_y = false;
};

int parse_index(const std::string& s, std::size_t& pos, int n, const std::string& name) {
  const std::size_t start = pos;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos == start) throw ValidationError("unknown functional '" + name + "'");
  const int i = std::stoi(s.substr(start, pos - start));
  if (i < 1 || i > n) {
    throw ValidationError("functional '" + name + "': index out of range 1.." + std::to_string(n));
  }
  return i - 1;
}

Functional parse_functional(const std::string& name, int n) {
  if (name == "y") return {[](double y, const auto&) { return y; }};
  if (name == "y2") return {[](double y, const auto&) { return y * y; }};
  if (name == "inv_y") return {[](double y, const auto&) { return 1.0 / y; }, true};
  if (name.empty() || name[0] != 'x') throw ValidationError("unknown functional '" + name + "'");
  std::size_t pos = 1;
  const int i = parse_index(name, pos, n, name);
  const std::string rest = name.substr(pos);
  if (rest.empty()) return {[i](double, const auto& x) { return x(i); }};
  if (rest == "_over_y") return {[i](double y, const auto& x) { return x(i) / y; }, true};
  if (rest[0] == 'x') {
    std::size_t p2 = 1;
    const int j = parse_index(rest, p2, n, name);
    if (rest.substr(p2) == "_over_y") {
      return {[i, j](double y, const auto& x) { return x(i) * x(j) / y; }, true};
    }
  }
  throw ValidationError("unknown functional '" + name + "'");
}

Eigen::Index last_index(const PathGrid& path, double horizon) {
  Eigen::Index last = path.size() - 1;
  if (horizon > 0) {
    const double cut = horizon + 1e-9 * std::max(1.0, horizon);
    while (last > 0 && path.times(last) > cut) --last;
  }
  return last;
}

Eigen::Index index_at(const PathGrid& path, double at) {
  for (Eigen::Index l = 0; l < path.size(); ++l) {
    if (std::abs(path.times(l) - at) <= 1e-9 * std::max(1.0, at)) return l;
  }
  throw ValidationError("empirical_cf: time " + format_double(at) + " is not on the path grid");
}

// Left-endpoint integral of Y over [0, times(last)].
double y_integral(const PathGrid& path, Eigen::Index last) {
  double s = 0.0;
  for (Eigen::Index l = 0; l < last; ++l) s += path.y(l) * (path.times(l + 1) - path.times(l));
  return s;
}

Json header_json(const StudyConfig& cfg) {
  Json h;
  h["schema"] = kReportSchema;
  h["version"] = kVersion;
  h["mode"] = to_string(cfg.mode);
  h["spec"] = spec_to_json(cfg.spec);
  h["spec_hash"] = spec_hash(cfg.spec);
  h["seed"] = cfg.seed;
  h["dt"] = cfg.dt;
  h["n_paths"] = cfg.n_paths;
  h["T_grid"] = cfg.t_grid;
  h["scheme"] = to_string(cfg.scheme);
  h["ordering"] = kOrderingTag;
  const StudyTolerances& t = cfg.tol;
  h["tolerances"] = {{"ratio_low", t.ratio_low},
                     {"ratio_high", t.ratio_high},
                     {"median_error_max", t.median_error_max},
                     {"mean_band", t.mean_band},
                     {"var_low", t.var_low},
                     {"var_high", t.var_high},
                     {"cov_discrepancy", t.cov_discrepancy},
                     {"stabilization", t.stabilization},
                     {"iqr_low", t.iqr_low},
                     {"iqr_high", t.iqr_high},
                     {"ergodic_y", t.ergodic_y},
                     {"ergodic_inv_y", t.ergodic_inv_y},
                     {"cf_gap", t.cf_gap}};
  return h;
}

SimConfig sim_config(const StudyConfig& cfg) {
  return {cfg.t_grid.back(), cfg.dt, cfg.scheme, cfg.seed};
}

void require_subcritical_with_inverse_moment(const ModelSpec& spec, const char* what) {
  if (classify(spec).label != Regime::Subcritical) {
    throw ValidationError(std::string(what) + ": requires a subcritical spec");
  }
  (void)stationary_moments(spec);  // throws unless a > sigma_1^2 / 2
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double ergodic_average(const PathGrid& path, const std::string& functional, double horizon) {
  path.check();
  const Functional fn = parse_functional(functional, path.n());
  const Eigen::Index last = last_index(path, horizon);
  if (last < 1) throw ValidationError("ergodic_average: need at least one step");
  double sum = 0.0, time = 0.0;
  std::int64_t skipped = 0;
  for (Eigen::Index l = 0; l < last; ++l) {
    const double h = path.times(l + 1) - path.times(l);
    if (fn.divides_by_y && path.y(l) < kYFloor) {
      ++skipped;
      continue;
    }
    sum += fn.f(path.y(l), path.x.row(l)) * h;
    time += h;
  }
  if (double(skipped) > kMaxSkippedFraction * double(last)) {
    throw NumericalError("ergodic_average: too many steps below the Y floor");
  }
  return sum / time;
}

Complex empirical_cf(const Vec& y, const Mat& x, const FLArgument& arg) {
  if (y.size() == 0) throw ValidationError("empirical_cf: empty ensemble");
  if (x.rows() != y.size() || x.cols() != arg.mu.size()) {
    throw ValidationError("empirical_cf: state and argument shapes disagree");
  }
  if (arg.lambda == 0.0 && arg.mu.isZero(0.0)) return 1.0;
  Complex sum = 0.0;
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    sum += std::exp(Complex(-arg.lambda * y(k), x.row(k).dot(arg.mu)));
  }
  return sum / double(y.size());
}

Complex empirical_cf(const std::vector<PathGrid>& ensemble, const FLArgument& arg, double at) {
  if (ensemble.empty()) throw ValidationError("empirical_cf: empty ensemble");
  Vec y(ensemble.size());
  Mat x(ensemble.size(), ensemble.front().n());
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    const Eigen::Index l = index_at(ensemble[k], at);
    y(k) = ensemble[k].y(l);
    x.row(k) = ensemble[k].x.row(l);
  }
  return empirical_cf(y, x, arg);
}

std::string to_string(StudyMode mode) {
  switch (mode) {
    case StudyMode::Consistency: return "consistency";
    case StudyMode::Normality: return "normality";
    case StudyMode::Supercritical: return "supercritical";
    case StudyMode::Ergodic: return "ergodic";
    case StudyMode::CfCompare: return "cf-compare";
  }
  return "unknown";
}

StudyMode study_mode_from_string(const std::string& name) {
  for (StudyMode m : {StudyMode::Consistency, StudyMode::Normality, StudyMode::Supercritical,
                      StudyMode::Ergodic, StudyMode::CfCompare}) {
    if (to_string(m) == name) return m;
  }
  throw ValidationError("unknown study mode '" + name + "'");
}

void validate_study(const StudyConfig& cfg) {
  require_valid(cfg.spec);
  if (cfg.t_grid.empty()) throw ValidationError("study: T_grid must not be empty");
  for (std::size_t i = 0; i < cfg.t_grid.size(); ++i) {
    if (!(cfg.t_grid[i] > 0) || (i > 0 && !(cfg.t_grid[i] > cfg.t_grid[i - 1]))) {
      throw ValidationError("study: T_grid must be positive and strictly ascending");
    }
  }
  if (cfg.n_paths < 1) throw ValidationError("study: n_paths must be at least 1");
  const SimConfig sim = sim_config(cfg);
  if (double(cfg.n_paths) * double(step_count(sim)) > kMaxEnsembleSteps) {
    throw ValidationError("study: n_paths * steps exceeds 1e10");
  }
  if (cfg.dt > cfg.t_grid.front()) throw ValidationError("study: dt exceeds the smallest T");
}

bool StudyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass(); });
}

const StudyCheck& StudyReport::check(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw ValidationError("report has no check named '" + name + "'");
}

Json StudyReport::to_json() const {
  Json out = header;
  Json cs = Json::array();
  for (const auto& c : checks) {
    Json j = {{"name", c.name}, {"value", c.value}, {"pass", c.pass()}};
    j["lower"] = std::isfinite(c.lower) ? Json(c.lower) : Json(nullptr);
    j["upper"] = std::isfinite(c.upper) ? Json(c.upper) : Json(nullptr);
    cs.push_back(std::move(j));
  }
  out["summary"] = summary;
  out["checks"] = std::move(cs);
  out["passed"] = passed();
  out["records"] = records;
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) throw ValidationError("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

double interquartile_range(std::vector<double> v) {
  if (v.empty()) throw ValidationError("interquartile range of an empty sample");
  std::sort(v.begin(), v.end());
  auto quantile = [&](double q) {
    const double pos = q * double(v.size() - 1);
    const std::size_t lo = std::size_t(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
  };
  return quantile(0.75) - quantile(0.25);
}

StudyReport run_consistency_study(const StudyConfig& cfg) {
  validate_study(cfg);
  require_subcritical_with_inverse_moment(cfg.spec, "consistency study");
  const Vec tau = tau_of(cfg.spec);
  const std::size_t nt = cfg.t_grid.size();
  const auto paths = std::size_t(cfg.n_paths);
  std::vector<Vec> estimates(nt * paths);
  const SimConfig sim = sim_config(cfg);
  parallel_for(cfg.n_paths, [&](std::int64_t k) {
    const PathGrid path = simulate_path(cfg.spec, sim, std::uint64_t(k));
    for (std::size_t i = 0; i < nt; ++i) {
      estimates[i * paths + k] = mle_full(path, cfg.spec.rho, cfg.t_grid[i]).tau_hat;
    }
  });

  StudyReport rep;
  rep.mode = cfg.mode;
  rep.header = header_json(cfg);
  std::vector<double> medians;
  for (std::size_t i = 0; i < nt; ++i) {
    std::vector<double> errors;
    for (std::size_t k = 0; k < paths; ++k) {
      const Vec& est = estimates[i * paths + k];
      const double err = (est - tau).cwiseAbs().maxCoeff();
      errors.push_back(err);
      rep.records.push_back({{"T", cfg.t_grid[i]},
                             {"replicate", k},
                             {"tau_hat", to_json(est)},
                             {"error_inf", err}});
    }
    medians.push_back(median(errors));
  }
  rep.summary["median_error_inf"] = medians;
  std::vector<double> ratios;
  bool decreasing = true;
  for (std::size_t i = 1; i < nt; ++i) {
    ratios.push_back(medians[i - 1] / medians[i]);
    decreasing = decreasing && medians[i] < medians[i - 1];
    rep.checks.push_back({"median_ratio_T" + format_double(cfg.t_grid[i - 1]) + "_to_T" +
                              format_double(cfg.t_grid[i]),
                          ratios.back(), cfg.tol.ratio_low, cfg.tol.ratio_high});
  }
  rep.summary["decay_ratios"] = ratios;
  rep.summary["theoretical_ratios"] = [&] {
    std::vector<double> r;
    for (std::size_t i = 1; i < nt; ++i) r.push_back(std::sqrt(cfg.t_grid[i] / cfg.t_grid[i - 1]));
    return r;
  }();
  rep.checks.push_back({"medians_strictly_decreasing", decreasing ? 1.0 : 0.0, 1.0, 1.0});
  rep.checks.push_back({"median_error_at_largest_T", medians.back(), 0.0, cfg.tol.median_error_max});
  return rep;
}

StudyReport run_normality_study(const StudyConfig& cfg) {
  validate_study(cfg);
  require_subcritical_with_inverse_moment(cfg.spec, "normality study");
  const Vec tau = tau_of(cfg.spec);
  const auto labels = tau_labels(cfg.spec.n);
  const std::size_t nt = cfg.t_grid.size(), p = tau.size();
  const auto paths = std::size_t(cfg.n_paths);
  std::vector<Vec> scaled(nt * paths);  // sqrt(T)(tau_hat - tau)
  std::vector<Mat> vhat(nt * paths);    // (info / T)^{-1}
  const SimConfig sim = sim_config(cfg);
  parallel_for(cfg.n_paths, [&](std::int64_t k) {
    const PathGrid path = simulate_path(cfg.spec, sim, std::uint64_t(k));
    for (std::size_t i = 0; i < nt; ++i) {
      const MleResult r = mle_full(path, cfg.spec.rho, cfg.t_grid[i]);
      scaled[i * paths + k] = std::sqrt(r.horizon) * (r.tau_hat - tau);
      vhat[i * paths + k] = (r.info_matrix / r.horizon).inverse();
    }
  });

  StudyReport rep;
  rep.mode = cfg.mode;
  rep.header = header_json(cfg);
  Json per_t = Json::array();
  for (std::size_t i = 0; i < nt; ++i) {
    Vec mean_z = Vec::Zero(p), sq_z = Vec::Zero(p), mean_e = Vec::Zero(p);
    Mat vbar = Mat::Zero(p, p);
    bool spd = true;
    for (std::size_t k = 0; k < paths; ++k) {
      const Vec& e = scaled[i * paths + k];
      const Mat& v = vhat[i * paths + k];
      const Vec z = e.cwiseQuotient(v.diagonal().cwiseSqrt());
      mean_z += z;
      sq_z += z.cwiseAbs2();
      mean_e += e;
      vbar += v;
      Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (v + v.transpose()), Eigen::EigenvaluesOnly);
      spd = spd && eig.eigenvalues()(0) > 0 && (v - v.transpose()).norm() <= 1e-8 * v.norm();
      rep.records.push_back({{"T", cfg.t_grid[i]},
                             {"replicate", k},
                             {"scaled_error", to_json(e)},
                             {"standardized", to_json(z)}});
    }
    const double nn = double(paths);
    mean_z /= nn;
    mean_e /= nn;
    vbar /= nn;
    const Vec var_z = (sq_z / nn - mean_z.cwiseAbs2()) * (nn / std::max(1.0, nn - 1));
    Mat cov = Mat::Zero(p, p);
    for (std::size_t k = 0; k < paths; ++k) {
      const Vec c = scaled[i * paths + k] - mean_e;
      cov += c * c.transpose();
    }
    cov /= std::max(1.0, nn - 1);
    const double discrepancy = (cov - vbar).norm() / vbar.norm();
    per_t.push_back({{"T", cfg.t_grid[i]},
                     {"standardized_mean", to_json(mean_z)},
                     {"standardized_variance", to_json(var_z)},
                     {"empirical_covariance", to_json(cov)},
                     {"vhat_mean", to_json(vbar)},
                     {"covariance_discrepancy", discrepancy},
                     {"vhat_spd", spd}});
    if (i + 1 == nt) {
      for (std::size_t c = 0; c < p; ++c) {
        rep.checks.push_back({"standardized_mean_" + labels[c], mean_z(c), -cfg.tol.mean_band,
                              cfg.tol.mean_band});
        rep.checks.push_back({"standardized_variance_" + labels[c], var_z(c), cfg.tol.var_low,
                              cfg.tol.var_high});
      }
      rep.checks.push_back({"covariance_discrepancy", discrepancy, 0.0, cfg.tol.cov_discrepancy});
      rep.checks.push_back({"vhat_symmetric_positive_definite", spd ? 1.0 : 0.0, 1.0, 1.0});
    }
  }
  rep.summary["per_T"] = per_t;
  rep.summary["labels"] = labels;
  return rep;
}

std::optional<std::string> supercritical_hypothesis_violation(const ModelSpec& spec) {
  require_valid(spec);
  const Spectrum sp = spectrum(spec.theta);
  if (!(sp.max() < spec.b - kSpectrumTol && spec.b < -kSpectrumTol)) {
    return "requires lambda_max(theta) < b < 0";
  }
  const Vec pm = sp.inverse_modal * spec.m, pk = sp.inverse_modal * spec.kappa;
  if ((pm.cwiseProduct(pk).array() > 0.0).any()) {
    return "requires diag(P^{-1} m) P^{-1} kappa <= 0 componentwise";
  }
  return std::nullopt;
}

StudyReport run_supercritical_study(const StudyConfig& cfg) {
  validate_study(cfg);
  if (auto why = supercritical_hypothesis_violation(cfg.spec)) {
    throw ValidationError("supercritical study: " + *why);
  }
  const RegimeClass regime = classify(cfg.spec);
  const Vec tau_tilde = tau_tilde_of(cfg.spec);
  const auto labels = tau_tilde_labels(cfg.spec.n);
  const std::size_t nt = cfg.t_grid.size(), p = tau_tilde.size();
  const auto paths = std::size_t(cfg.n_paths);
  const double b = cfg.spec.b, lmin = regime.lambda_min_theta;

  struct Row {
    double scaled_y, scaled_int_y;
    Vec scaled_x, tau_tilde_hat, scaled_error;
  };
  std::vector<Row> rows(nt * paths);
  const SimConfig sim = sim_config(cfg);
  parallel_for(cfg.n_paths, [&](std::int64_t k) {
    const PathGrid path = simulate_path(cfg.spec, sim, std::uint64_t(k));
    for (std::size_t i = 0; i < nt; ++i) {
      const double t = cfg.t_grid[i];
      const Eigen::Index l = last_index(path, t);
      const RestrictedMleResult r = mle_restricted(path, cfg.spec.rho, cfg.spec.a, cfg.spec.m, t);
      const Vec logq = log_normalizer(regime, cfg.spec, r.horizon);
      Vec err = r.tau_tilde_hat - tau_tilde;
      for (std::size_t c = 0; c < p; ++c) {
        // Q_T entries beyond e^709 would overflow; the product stays finite.
        const double sign = err(c) < 0 ? -1.0 : 1.0;
        err(c) = err(c) == 0.0 ? 0.0 : sign * std::exp(logq(c) + std::log(std::abs(err(c))));
      }
      rows[i * paths + k] = {std::exp(b * t) * path.y(l), std::exp(b * t) * y_integral(path, l),
                             std::exp(lmin * t) * Vec(path.x.row(l).transpose()),
                             r.tau_tilde_hat, err};
    }
  });

  StudyReport rep;
  rep.mode = cfg.mode;
  rep.header = header_json(cfg);
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t k = 0; k < paths; ++k) {
      const Row& r = rows[i * paths + k];
      rep.records.push_back({{"T", cfg.t_grid[i]},
                             {"replicate", k},
                             {"scaled_y", r.scaled_y},
                             {"scaled_int_y", r.scaled_int_y},
                             {"scaled_x", to_json(r.scaled_x)},
                             {"tau_tilde_hat", to_json(r.tau_tilde_hat)},
                             {"scaled_error", to_json(r.scaled_error)}});
    }
  }
  rep.summary["labels"] = labels;
  rep.summary["log_Q_T"] = to_json(log_normalizer(regime, cfg.spec, cfg.t_grid.back()));
  const std::size_t last = nt - 1;
  if (nt >= 2) {
    std::vector<double> change;
    for (std::size_t k = 0; k < paths; ++k) {
      const double now = rows[last * paths + k].scaled_int_y;
      const double before = rows[(last - 1) * paths + k].scaled_int_y;
      change.push_back(std::abs(now - before) / std::abs(now));
    }
    const double med = median(change);
    rep.summary["median_relative_change_scaled_int_y"] = med;
    rep.checks.push_back({"median_relative_change_scaled_int_y", med, 0.0, cfg.tol.stabilization});
  }
  std::vector<double> iqrs;
  for (std::size_t c = 0; c < p; ++c) {
    std::vector<double> v;
    for (std::size_t k = 0; k < paths; ++k) v.push_back(rows[last * paths + k].scaled_error(c));
    iqrs.push_back(interquartile_range(v));
    rep.checks.push_back({"scaled_error_iqr_" + labels[c], iqrs.back(), cfg.tol.iqr_low,
                          cfg.tol.iqr_high});
  }
  rep.summary["scaled_error_iqr"] = iqrs;
  return rep;
}

StudyReport run_ergodic_study(const StudyConfig& cfg) {
  validate_study(cfg);
  require_subcritical_with_inverse_moment(cfg.spec, "ergodic study");
  const StationaryMoments sm = stationary_moments(cfg.spec);
  const std::size_t nt = cfg.t_grid.size();
  const auto paths = std::size_t(cfg.n_paths);
  std::vector<std::array<double, 2>> avg(nt * paths);
  const SimConfig sim = sim_config(cfg);
  parallel_for(cfg.n_paths, [&](std::int64_t k) {
    const PathGrid path = simulate_path(cfg.spec, sim, std::uint64_t(k));
    for (std::size_t i = 0; i < nt; ++i) {
      avg[i * paths + k] = {ergodic_average(path, "y", cfg.t_grid[i]),
                            ergodic_average(path, "inv_y", cfg.t_grid[i])};
    }
  });
  StudyReport rep;
  rep.mode = cfg.mode;
  rep.header = header_json(cfg);
  Json per_t = Json::array();
  double gap_y = 0.0, gap_inv = 0.0;
  for (std::size_t i = 0; i < nt; ++i) {
    double my = 0.0, minv = 0.0;
    for (std::size_t k = 0; k < paths; ++k) {
      const auto& a = avg[i * paths + k];
      my += a[0];
      minv += a[1];
      rep.records.push_back(
          {{"T", cfg.t_grid[i]}, {"replicate", k}, {"mean_y", a[0]}, {"mean_inv_y", a[1]}});
    }
    my /= double(paths);
    minv /= double(paths);
    gap_y = std::abs(my - sm.mean_y_inf);
    gap_inv = std::abs(minv - sm.inv_mean_y_inf);
    per_t.push_back({{"T", cfg.t_grid[i]}, {"mean_y", my}, {"mean_inv_y", minv}});
  }
  rep.summary["per_T"] = per_t;
  rep.summary["stationary_mean_y"] = sm.mean_y_inf;
  rep.summary["stationary_mean_inv_y"] = sm.inv_mean_y_inf;
  rep.checks.push_back({"abs_gap_mean_y", gap_y, 0.0, cfg.tol.ergodic_y});
  rep.checks.push_back({"abs_gap_mean_inv_y", gap_inv, 0.0, cfg.tol.ergodic_inv_y});
  return rep;
}

std::vector<FLArgument> default_cf_points(int n) {
  const double pts[5][2] = {{1.0, 0.5}, {0.5, 0.2}, {2.0, 1.0}, {1.0, -0.5}, {0.25, 1.0}};
  std::vector<FLArgument> out;
  for (const auto& p : pts) out.push_back({p[0], Vec::Constant(n, p[1])});
  return out;
}

StudyReport run_cf_compare_study(const StudyConfig& cfg) {
  validate_study(cfg);
  if (classify(cfg.spec).label != Regime::Subcritical) {
    throw ValidationError("cf-compare study: requires a subcritical spec");
  }
  const auto points = cfg.cf_points.empty() ? default_cf_points(cfg.spec.n) : cfg.cf_points;
  const double t = cfg.t_grid.back();
  const EnsembleSnapshots snap = simulate_snapshots(cfg.spec, sim_config(cfg), cfg.n_paths, {t});

  StudyReport rep;
  rep.mode = cfg.mode;
  rep.header = header_json(cfg);
  for (std::int64_t k = 0; k < cfg.n_paths; ++k) {
    rep.records.push_back({{"T", t},
                           {"replicate", k},
                           {"y", snap.y(k, 0)},
                           {"x", to_json(Vec(snap.x[0].row(k).transpose()))}});
  }
  Json cmp = Json::array();
  for (std::size_t j = 0; j < points.size(); ++j) {
    const Complex emp = empirical_cf(snap.y.col(0), snap.x[0], points[j]);
    const Complex ana = stationary_cf(cfg.spec, points[j]);
    const double gap = std::abs(emp - ana);
    cmp.push_back({{"lambda", points[j].lambda},
                   {"mu", to_json(points[j].mu)},
                   {"empirical", {emp.real(), emp.imag()}},
                   {"stationary", {ana.real(), ana.imag()}},
                   {"abs_gap", gap}});
    rep.checks.push_back({"cf_gap_" + std::to_string(j), gap, 0.0, cfg.tol.cf_gap});
  }
  rep.summary["points"] = cmp;
  return rep;
}

StudyReport run_study(const StudyConfig& cfg) {
  switch (cfg.mode) {
    case StudyMode::Consistency: return run_consistency_study(cfg);
    case StudyMode::Normality: return run_normality_study(cfg);
    case StudyMode::Supercritical: return run_supercritical_study(cfg);
    case StudyMode::Ergodic: return run_ergodic_study(cfg);
    case StudyMode::CfCompare: return run_cf_compare_study(cfg);
  }
  throw ValidationError("unknown study mode");
}

}  // namespace adkit
