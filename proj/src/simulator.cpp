#include "adkit/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <filesystem>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace adkit {

std::string to_string(Scheme scheme) {
  return scheme == Scheme::ExactCIR ? "exact-cir" : "euler-full-truncation";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "euler-full-truncation" || name == "euler") return Scheme::EulerFullTruncation;
  if (name == "exact-cir" || name == "exact") return Scheme::ExactCIR;
  throw ValidationError("unknown scheme '" + name + "'");
}

std::int64_t step_count(const SimConfig& config) {
  if (!(std::isfinite(config.horizon) && config.horizon > 0)) {
    throw ValidationError("simulation horizon must be positive and finite");
  }
  if (!(std::isfinite(config.dt) && config.dt > 0)) {
    throw ValidationError("dt must be positive and finite");
  }
  if (config.dt > config.horizon * (1 + 1e-12)) {
    throw ValidationError("dt must not exceed the horizon");
  }
  const double ratio = config.horizon / config.dt;
  if (ratio > kMaxStepsPerPath) {
    throw ValidationError("step-count guard: T/dt exceeds 1e9");
  }
  const double nearest = std::round(ratio);
  const double steps =
      std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio) ? nearest : std::ceil(ratio);
  return std::max<std::int64_t>(1, std::int64_t(steps));
}

namespace {

double grid_time(const SimConfig& config, std::int64_t l, std::int64_t steps) {
  return l == steps ? config.horizon : double(l) * config.dt;
}

double decay_integral(double b, double t) {
  if (std::abs(b) <= kSpectrumTol) return t;
  return -std::expm1(-b * t) / b;
}

}  // namespace

void PathGrid::check() const {
  const Eigen::Index len = times.size();
  if (len < 1 || y.size() != len || x.rows() != len) {
    throw ValidationError("path: times, Y and X must have equal lengths");
  }
  if (!times.allFinite() || !y.allFinite() || !x.allFinite()) {
    throw ValidationError("path: non-finite entries");
  }
  if ((y.array() < 0.0).any()) throw ValidationError("path: Y must be nonnegative");
  if (len < 2) return;
  const double h = times(1) - times(0);
  const double tol = 1e-12 * std::max(1.0, std::abs(times(len - 1)));
  for (Eigen::Index l = 0; l + 1 < len; ++l) {
    const double step = times(l + 1) - times(l);
    if (!(step > 0)) throw ValidationError("path: times must be strictly increasing");
    // the final step may be shortened
    if (l + 2 < len && std::abs(step - h) > tol) {
      throw ValidationError("path: times must be uniformly spaced");
    }
  }
}

PathStepper::PathStepper(const ModelSpec& spec, Scheme scheme, std::uint64_t seed,
                         std::uint64_t stream)
    : spec_(spec),
      scheme_(scheme),
      rng_(seed, stream),
      rho_x_(spec.rho.bottomRows(spec.n)),
      y_(spec.y0),
      x_(spec.x0),
      db_(spec.d()) {}

double PathStepper::exact_cir_draw(double h) {
  // Y_{t+h} = c * chi'^2(delta, nc); the noncentral chi-square is a
  // Poisson mixture of central ones.
  const double s2 = spec_.rho11() * spec_.rho11();
  const double c = s2 * decay_integral(spec_.b, h) / 4.0;
  const double delta = 4.0 * spec_.a / s2;
  const double nc = y_ * std::exp(-spec_.b * h) / c;
  double shape = 0.5 * delta;
  if (nc > 0) shape += double(std::poisson_distribution<std::int64_t>(0.5 * nc)(rng_));
  return 2.0 * c * std::gamma_distribution<double>(shape, 1.0)(rng_);
}

void PathStepper::step(double h) {
  const double sqrt_h = std::sqrt(h);
  const double y = std::max(y_, 0.0);
  const double sqrt_y = std::sqrt(y);
  double y_next;
  if (scheme_ == Scheme::EulerFullTruncation) {
    for (Eigen::Index i = 0; i < db_.size(); ++i) db_(i) = sqrt_h * rng_.normal();
    y_next = y + (spec_.a - spec_.b * y) * h + spec_.rho11() * sqrt_y * db_(0);
  } else {
    y_next = exact_cir_draw(h);
    if (y > 0) {
      db_(0) = (y_next - y - (spec_.a - spec_.b * y) * h) / (spec_.rho11() * sqrt_y);
    } else {
      db_(0) = sqrt_h * rng_.normal();
    }
    for (Eigen::Index i = 1; i < db_.size(); ++i) db_(i) = sqrt_h * rng_.normal();
  }
  x_ += (spec_.m - spec_.kappa * y - spec_.theta * x_) * h + sqrt_y * (rho_x_ * db_);
  y_ = std::max(y_next, 0.0);
}

void PathStepper::step(double h, const Vec& db) {
  if (db.size() != db_.size()) throw ValidationError("PathStepper: increment must have d entries");
  const double y = std::max(y_, 0.0);
  const double sqrt_y = std::sqrt(y);
  const double y_next = y + (spec_.a - spec_.b * y) * h + spec_.rho11() * sqrt_y * db(0);
  x_ += (spec_.m - spec_.kappa * y - spec_.theta * x_) * h + sqrt_y * (rho_x_ * db);
  y_ = std::max(y_next, 0.0);
}

PathGrid simulate_path(const ModelSpec& spec, const SimConfig& config) {
  return simulate_path(spec, config, 0);
}

PathGrid simulate_path(const ModelSpec& spec, const SimConfig& config,
                       std::uint64_t stream) {
  require_valid(spec);
  const std::int64_t steps = step_count(config);
  PathGrid out;
  out.times.resize(steps + 1);
  out.y.resize(steps + 1);
  out.x.resize(steps + 1, spec.n);
  out.spec_hash = spec_hash(spec);
  out.seed = config.seed;
  out.scheme = config.scheme;
  out.dt = config.dt;

  PathStepper stepper(spec, config.scheme, config.seed, stream);
  out.times(0) = 0.0;
  out.y(0) = stepper.y();
  out.x.row(0) = stepper.x().transpose();
  for (std::int64_t l = 0; l < steps; ++l) {
    const double t_next = grid_time(config, l + 1, steps);
    stepper.step(t_next - out.times(l));
    out.times(l + 1) = t_next;
    out.y(l + 1) = stepper.y();
    out.x.row(l + 1) = stepper.x().transpose();
  }
  if (!out.x.allFinite()) throw NumericalError("simulate_path: X overflowed");
  return out;
}

void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& body) {
  const std::int64_t workers =
      std::min<std::int64_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::int64_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (std::int64_t k = next++; k < count; k = next++) {
      try {
        body(k);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::int64_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {
void ensemble_guard(const SimConfig& config, std::int64_t n_paths) {
  if (n_paths < 1) throw ValidationError("ensemble: n_paths must be at least 1");
  if (double(n_paths) * double(step_count(config)) > kMaxEnsembleSteps) {
    throw ValidationError("ensemble guard: n_paths * steps exceeds 1e10");
  }
}
}  // namespace

std::vector<PathGrid> simulate_ensemble(const ModelSpec& spec,
                                        const SimConfig& config,
                                        std::int64_t n_paths) {
  require_valid(spec);
  ensemble_guard(config, n_paths);
  std::vector<PathGrid> out(n_paths);
  parallel_for(n_paths, [&](std::int64_t k) { out[k] = simulate_path(spec, config, k); });
  return out;
}

EnsembleSnapshots simulate_snapshots(const ModelSpec& spec,
                                     const SimConfig& config,
                                     std::int64_t n_paths,
                                     const std::vector<double>& snapshot_times) {
  require_valid(spec);
  ensemble_guard(config, n_paths);
  const std::int64_t steps = step_count(config);
  std::vector<std::int64_t> index;
  for (double s : snapshot_times) {
    const std::int64_t l = s >= config.horizon ? steps : std::int64_t(std::llround(s / config.dt));
    if (l < 0 || l > steps ||
        std::abs(grid_time(config, l, steps) - s) > 1e-9 * std::max(1.0, s)) {
      throw ValidationError("snapshot time " + format_double(s) + " is not a grid time");
    }
    index.push_back(l);
  }
  EnsembleSnapshots out;
  out.times = snapshot_times;
  out.y.resize(n_paths, index.size());
  out.x.assign(index.size(), Mat(n_paths, spec.n));
  const std::int64_t last = index.empty() ? 0 : *std::max_element(index.begin(), index.end());

  parallel_for(n_paths, [&](std::int64_t k) {
    PathStepper stepper(spec, config.scheme, config.seed, k);
    auto record = [&](std::int64_t l) {
      for (std::size_t j = 0; j < index.size(); ++j) {
        if (index[j] != l) continue;
        out.y(k, j) = stepper.y();
        out.x[j].row(k) = stepper.x().transpose();
      }
    };
    record(0);
    double t = 0.0;
    for (std::int64_t l = 0; l < last; ++l) {
      const double t_next = grid_time(config, l + 1, steps);
      stepper.step(t_next - t);
      t = t_next;
      record(l + 1);
    }
  });
  return out;
}

double cir_transition_density(double a, double b, double rho11, double t,
                              double y_from, double y_to) {
  if (!(std::isfinite(a) && std::isfinite(b) && std::isfinite(rho11) &&
        std::isfinite(t) && std::isfinite(y_from) && std::isfinite(y_to))) {
    throw ValidationError("cir_transition_density: non-finite parameters");
  }
  if (!(a > 0 && t > 0 && y_from > 0 && rho11 > 0)) {
    throw ValidationError("cir_transition_density: requires a, t, y_from, rho11 > 0");
  }
  if (y_to < 0) return 0.0;
  const double s2 = rho11 * rho11;
  const double c = s2 * decay_integral(b, t) / 4.0;
  const double delta = 4.0 * a / s2;
  const double half_nc = 0.5 * y_from * std::exp(-b * t) / c;
  const double x = y_to / c;
  if (x == 0.0) {
    if (delta > 2) return 0.0;
    if (delta == 2) return 0.5 * std::exp(-half_nc) / c;
    return std::numeric_limits<double>::infinity();
  }
  // Poisson(half_nc) mixture of chi-square(delta + 2j) densities at x,
  // summed in log space outward from the largest term.
  auto log_term = [&](double j) {
    const double k = 0.5 * delta + j;
    const double poisson = j == 0 ? -half_nc : -half_nc + j * std::log(half_nc) - std::lgamma(j + 1);
    return poisson + (k - 1) * std::log(x) - 0.5 * x - k * std::log(2.0) - std::lgamma(k);
  };
  const double j0 = std::floor(std::sqrt(half_nc * 0.5 * x));
  const double peak = log_term(j0);
  // the terms fall off on a scale of sqrt(j0), so the whole sum underflows
  if (peak + std::log(10 * std::sqrt(j0 + 1) + 10) < -800) return 0.0;
  if (half_nc == 0.0) return std::exp(peak) / c;
  double sum = 1.0;
  for (double j = j0 + 1;; ++j) {
    const double term = std::exp(log_term(j) - peak);
    sum += term;
    if (term < 1e-17 * sum && j > j0 + 2) break;
    if (j > j0 + 1e7) throw NumericalError("cir_transition_density: series did not converge");
  }
  for (double j = j0 - 1; j >= 0; --j) {
    const double term = std::exp(log_term(j) - peak);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return std::exp(peak + std::log(sum)) / c;
}

std::string path_to_csv(const PathGrid& path) {
  std::string out = "t,Y";
  for (int i = 1; i <= path.n(); ++i) out += ",X" + std::to_string(i);
  out += '\n';
  for (Eigen::Index l = 0; l < path.size(); ++l) {
    out += format_double(path.times(l));
    out += ',';
    out += format_double(path.y(l));
    for (int i = 0; i < path.n(); ++i) {
      out += ',';
      out += format_double(path.x(l, i));
    }
    out += '\n';
  }
  return out;
}

PathGrid path_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("path CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto columns = std::count(line.begin(), line.end(), ',') + 1;
  if (columns < 3 || line.rfind("t,Y,X1", 0) != 0) {
    throw ValidationError("path CSV: header must be t,Y,X1,...,Xn");
  }
  const int n = int(columns) - 2;
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = p + line.size();
    for (int col = 0; col < columns; ++col) {
      double v;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) {
        throw ValidationError("path CSV: bad number on data row " + std::to_string(rows + 1));
      }
      values.push_back(v);
      p = res.ptr;
      if (col + 1 < columns) {
        if (p == end || *p != ',') {
          throw ValidationError("path CSV: wrong column count on data row " +
                                std::to_string(rows + 1));
        }
        ++p;
      }
    }
    if (p != end) {
      throw ValidationError("path CSV: wrong column count on data row " + std::to_string(rows + 1));
    }
    ++rows;
  }
  if (rows == 0) throw ValidationError("path CSV: no data rows");
  PathGrid out;
  out.times.resize(rows);
  out.y.resize(rows);
  out.x.resize(rows, n);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = values.data() + r * columns;
    out.times(r) = row[0];
    out.y(r) = row[1];
    for (int i = 0; i < n; ++i) out.x(r, i) = row[2 + i];
  }
  out.dt = rows > 1 ? out.times(1) - out.times(0) : 0.0;
  out.check();
  return out;
}

Json path_metadata(const PathGrid& path) {
  Json j;
  j["spec_hash"] = path.spec_hash;
  j["seed"] = path.seed;
  j["scheme"] = to_string(path.scheme);
  j["dt"] = path.dt;
  j["points"] = path.size();
  j["n"] = path.n();
  return j;
}

void save_path(const PathGrid& path, const std::string& csv_path) {
  write_file(csv_path, path_to_csv(path));
  write_file(csv_path + ".json", path_metadata(path).dump(2) + "\n");
}

PathGrid load_path(const std::string& csv_path) {
  PathGrid out = path_from_csv(read_file(csv_path));
  const std::string sidecar = csv_path + ".json";
  if (std::filesystem::exists(sidecar)) {
    try {
      const Json meta = Json::parse(read_file(sidecar));
      out.spec_hash = meta.value("spec_hash", "");
      out.seed = meta.value("seed", std::uint64_t{0});
      out.scheme = scheme_from_string(meta.value("scheme", "euler-full-truncation"));
      out.dt = meta.value("dt", out.dt);
    } catch (const Json::exception& e) {
      throw ValidationError("path sidecar '" + sidecar + "': " + e.what());
    }
  }
  return out;
}

}  // namespace adkit
