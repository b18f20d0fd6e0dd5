#pragma once

// Monte Carlo studies. Replicate k of a study is driven by stream k of the
// study seed, so a (config, seed) pair fully determines its report.

#include <optional>
#include <string>
#include <vector>

#include "adkit/estimator.hpp"
#include "adkit/riccati.hpp"
#include "adkit/simulator.hpp"

namespace adkit {

inline constexpr const char* kReportSchema = "adkit-report-v1";
inline constexpr const char* kVersion = "0.1.0";

/// Left-endpoint time average of a named functional over [0, horizon]:
/// y, inv_y, y2, x<i>, x<i>_over_y, x<i>x<j>_over_y (1-based indices).
/// Functionals dividing by Y skip steps below the Y floor (at most 0.1%).
double ergodic_average(const PathGrid& path, const std::string& functional,
                       double horizon = -1.0);

/// (1/N) sum exp(-lambda Y + i mu^T X) over the ensemble's states at time `at`.
Complex empirical_cf(const std::vector<PathGrid>& ensemble, const FLArgument& arg, double at);
/// Same over terminal states: y has one entry per path, x one row per path.
Complex empirical_cf(const Vec& y, const Mat& x, const FLArgument& arg);

enum class StudyMode { Consistency, Normality, Supercritical, Ergodic, CfCompare };

std::string to_string(StudyMode mode);
StudyMode study_mode_from_string(const std::string& name);

/// Frozen tolerance bands; reports carry them as data.
struct StudyTolerances {
  double ratio_low = 1.5, ratio_high = 2.7;
  double median_error_max = 0.35;           // full MLE at the largest T
  double mean_band = 0.15;                  // standardized means
  double var_low = 0.7, var_high = 1.3;     // standardized variances
  double cov_discrepancy = 0.25;
  double stabilization = 0.05;              // supercritical relative change
  double iqr_low = 0.01, iqr_high = 100.0;
  double ergodic_y = 0.05, ergodic_inv_y = 0.03;
  double cf_gap = 0.02;
};

struct StudyConfig {
  ModelSpec spec;
  std::vector<double> t_grid;
  double dt = 1e-2;
  std::int64_t n_paths = 1;
  std::uint64_t seed = 0;
  StudyMode mode = StudyMode::Consistency;
  Scheme scheme = Scheme::EulerFullTruncation;
  std::vector<FLArgument> cf_points;  // CfCompare only
  StudyTolerances tol;
};

void validate_study(const StudyConfig& cfg);

struct StudyCheck {
  std::string name;
  double value;
  double lower;
  double upper;
  bool pass() const { return value >= lower && value <= upper; }
};

struct StudyReport {
  StudyMode mode = StudyMode::Consistency;
  Json records = Json::array();
  Json summary = Json::object();
  std::vector<StudyCheck> checks;
  Json header;  // spec, hash, seed, dt, version

  bool passed() const;
  const StudyCheck& check(const std::string& name) const;
  Json to_json() const;
};

StudyReport run_consistency_study(const StudyConfig& cfg);
StudyReport run_normality_study(const StudyConfig& cfg);
StudyReport run_supercritical_study(const StudyConfig& cfg);
StudyReport run_ergodic_study(const StudyConfig& cfg);
StudyReport run_cf_compare_study(const StudyConfig& cfg);
StudyReport run_study(const StudyConfig& cfg);

/// lambda_max(theta) < b < 0 and diag(P^{-1} m) P^{-1} kappa <= 0; returns
/// the reason when the hypothesis fails.
std::optional<std::string> supercritical_hypothesis_violation(const ModelSpec& spec);

/// Default CF comparison points used when a config lists none.
std::vector<FLArgument> default_cf_points(int n);

double median(std::vector<double> v);
/// Interquartile range with linear interpolation between order statistics.
double interquartile_range(std::vector<double> v);

}  // namespace adkit
