#pragma once

// Path generation for the AD(1,n) model.
//
// EulerFullTruncation evaluates drift and diffusion at Y+ = max(Y, 0) and
// stores max(Y_next, 0), so stored and propagated states coincide.
// ExactCIR draws Y from its noncentral chi-square transition and keeps the
// X block Euler, driven by the Brownian increment implied by the Y move.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "adkit/model.hpp"
#include "adkit/model_io.hpp"
#include "adkit/rng.hpp"

namespace adkit {

enum class Scheme { EulerFullTruncation, ExactCIR };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

struct SimConfig {
  double horizon = 1.0;
  double dt = 1e-2;
  Scheme scheme = Scheme::EulerFullTruncation;
  std::uint64_t seed = 0;
};

inline constexpr double kMaxStepsPerPath = 1e9;
inline constexpr double kMaxEnsembleSteps = 1e10;

/// Number of steps of the grid 0, dt, 2dt, ..., T (last step shortened
/// when dt does not divide T). Validates the config.
std::int64_t step_count(const SimConfig& config);

struct PathGrid {
  Vec times;
  Vec y;
  Mat x;  // one row per grid point
  std::string spec_hash;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::EulerFullTruncation;
  double dt = 0.0;

  Eigen::Index size() const { return times.size(); }
  int n() const { return int(x.cols()); }
  double horizon() const { return times(times.size() - 1); }
  /// Throws ValidationError when an invariant fails.
  void check() const;
};

/// Single-path stepper shared by every simulation entry point, so that a
/// path is the same whichever API produced it.
class PathStepper {
 public:
  PathStepper(const ModelSpec& spec, Scheme scheme, std::uint64_t seed,
              std::uint64_t stream);

  void step(double h);
  /// Euler full-truncation step driven by the given Brownian increment
  /// (size d); used for common-random-number comparisons across dt.
  void step(double h, const Vec& db);
  double y() const { return y_; }
  const Vec& x() const { return x_; }

 private:
  double exact_cir_draw(double h);

  const ModelSpec& spec_;
  Scheme scheme_;
  PhiloxStream rng_;
  Mat rho_x_;  // rows 2..d of rho
  double y_;
  Vec x_;
  Vec db_;
};

PathGrid simulate_path(const ModelSpec& spec, const SimConfig& config);
/// Path driven by stream k of config.seed; stream 0 is simulate_path.
PathGrid simulate_path(const ModelSpec& spec, const SimConfig& config,
                       std::uint64_t stream);

/// Path k uses stream k. Runs on all hardware threads; the result does not
/// depend on the thread count.
std::vector<PathGrid> simulate_ensemble(const ModelSpec& spec,
                                        const SimConfig& config,
                                        std::int64_t n_paths);

/// States of an ensemble at selected grid times without storing paths.
struct EnsembleSnapshots {
  std::vector<double> times;
  Mat y;               // paths x snapshots
  std::vector<Mat> x;  // per snapshot: paths x n
};

/// Every snapshot time must lie on the grid (multiple of dt or the horizon).
EnsembleSnapshots simulate_snapshots(const ModelSpec& spec,
                                     const SimConfig& config,
                                     std::int64_t n_paths,
                                     const std::vector<double>& snapshot_times);

/// Runs body(k) for k in [0, count) on a pool of threads.
void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& body);

/// Exact density of Y_t given Y_0 = y_from for the CIR factor.
double cir_transition_density(double a, double b, double rho11, double t,
                              double y_from, double y_to);

/// CSV with header t,Y,X1,...,Xn and shortest round-trip numbers.
std::string path_to_csv(const PathGrid& path);
PathGrid path_from_csv(const std::string& text);
/// Sidecar metadata: spec hash, seed, scheme, dt, point count.
Json path_metadata(const PathGrid& path);

void save_path(const PathGrid& path, const std::string& csv_path);
/// Reads the CSV and, when present, the sidecar "<csv_path>.json".
PathGrid load_path(const std::string& csv_path);

}  // namespace adkit
