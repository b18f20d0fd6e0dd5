#include "adkit/cli.hpp"

#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "adkit/experiments.hpp"

namespace adkit {

namespace {

constexpr int kUsage = 64;

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(std::string(what) + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw ValidationError(std::string(what) + ": empty list");
  return out;
}

Mat load_rho(const std::string& path) {
  try {
    const Json j = Json::parse(read_file(path));
    return mat_from_json(j.is_object() ? j.at("rho") : j, "rho");
  } catch (const Json::exception& e) {
    throw ValidationError("rho file '" + path + "': " + e.what());
  }
}

void emit(const Json& j, const std::string& out_path, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    out << text;
  } else {
    write_file(out_path, text);
  }
}

Json complex_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}, {"abs", std::abs(z)}}; }

}  // namespace

int cli_dispatch(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"adkit: AD(1,n) affine diffusions - simulation, Riccati transforms, MLE"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string config, out_path, path_file, rho_file, scheme = "euler-full-truncation",
                                                     mode, mu_text, t_grid_text, functionals;
  double horizon = 10.0, dt = 1e-2, lambda = 0.0, tol = 1e-10, est_horizon = -1.0;
  double grid_max = 50.0, grid_min = -50.0;
  int grid_points = 101;
  std::uint64_t seed = 0;
  std::int64_t n_paths = 100;
  bool estimate_diff = false, restricted = false;
  std::optional<double> cert_c, cert_r;

  auto* classify_cmd = app.add_subcommand("classify", "Report the regime of a model spec");
  classify_cmd->add_option("--config", config, "Model spec JSON")->required();
  classify_cmd->add_option("--out", out_path, "Also write the verdict as JSON");

  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate one path to CSV");
  simulate_cmd->add_option("--config", config, "Model spec JSON")->required();
  simulate_cmd->add_option("--T", horizon, "Horizon")->required();
  simulate_cmd->add_option("--dt", dt, "Step size")->required();
  simulate_cmd->add_option("--seed", seed, "RNG seed");
  simulate_cmd->add_option("--scheme", scheme, "euler-full-truncation | exact-cir");
  simulate_cmd->add_option("--out", out_path, "Output CSV (sidecar <out>.json)")->required();

  auto* estimate_cmd = app.add_subcommand("estimate", "Drift MLE from a path CSV");
  estimate_cmd->add_option("--path", path_file, "Path CSV")->required();
  auto* rho_opt = estimate_cmd->add_option("--rho-known", rho_file, "JSON with the known rho");
  auto* diff_flag =
      estimate_cmd->add_flag("--estimate-diffusion", estimate_diff, "Estimate rho from the path");
  rho_opt->excludes(diff_flag);
  estimate_cmd->add_flag("--restricted", restricted, "Restricted MLE with a, m from --config");
  estimate_cmd->add_option("--config", config, "Model spec JSON (known a, m)");
  estimate_cmd->add_option("--horizon", est_horizon, "Use only t <= horizon");
  estimate_cmd->add_option("--out", out_path, "Output JSON (default stdout)");

  auto* cf_cmd = app.add_subcommand("stationary-cf", "Stationary Fourier-Laplace transform");
  cf_cmd->add_option("--config", config, "Model spec JSON")->required();
  cf_cmd->add_option("--lambda", lambda, "Laplace variable (>= 0)");
  cf_cmd->add_option("--mu", mu_text, "Fourier variable, comma separated");
  cf_cmd->add_option("--tol", tol, "Tolerance");
  cf_cmd->add_option("--out", out_path, "Output JSON (default stdout)");

  auto* ergodic_cmd = app.add_subcommand("ergodic-check", "Time averages along one path");
  ergodic_cmd->add_option("--config", config, "Model spec JSON")->required();
  ergodic_cmd->add_option("--T", horizon, "Horizon");
  ergodic_cmd->add_option("--dt", dt, "Step size");
  ergodic_cmd->add_option("--seed", seed, "RNG seed");
  ergodic_cmd->add_option("--functionals", functionals, "Comma separated (default y,inv_y)");
  ergodic_cmd->add_option("--out", out_path, "Output JSON (default stdout)");

  auto* lyap_cmd = app.add_subcommand("lyapunov", "Drift certificate and lattice check");
  lyap_cmd->add_option("--config", config, "Model spec JSON")->required();
  lyap_cmd->add_option("--c", cert_c, "Certificate rate c");
  lyap_cmd->add_option("--r", cert_r, "Weight r of ||x||^2");
  lyap_cmd->add_option("--grid-max", grid_max, "Lattice extent: y in [0, max], x in [min, max]");
  lyap_cmd->add_option("--grid-min", grid_min, "Lower x extent of the lattice");
  lyap_cmd->add_option("--grid-points", grid_points, "Nodes per axis");
  lyap_cmd->add_option("--out", out_path, "Output JSON (default stdout)");

  auto* study_cmd = app.add_subcommand("mc-study", "Monte Carlo study report");
  study_cmd->add_option("--config", config, "Model spec JSON")->required();
  study_cmd->add_option("--mode", mode,
                        "consistency | normality | supercritical | ergodic | cf-compare")
      ->required();
  study_cmd->add_option("--T-grid", t_grid_text, "Comma separated horizons")->required();
  study_cmd->add_option("--dt", dt, "Step size");
  study_cmd->add_option("--paths", n_paths, "Replicates");
  study_cmd->add_option("--seed", seed, "RNG seed");
  study_cmd->add_option("--scheme", scheme, "euler-full-truncation | exact-cir");
  study_cmd->add_option("--out", out_path, "Output JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (*classify_cmd) {
      const RegimeClass rc = classify(load_spec(config));
      out << to_string(rc.label) << "\n"
          << "b = " << format_double(rc.b) << "\n"
          << "lambda_min(theta) = " << format_double(rc.lambda_min_theta) << "\n"
          << "lambda_max(theta) = " << format_double(rc.lambda_max_theta) << "\n";
      if (!out_path.empty()) {
        emit({{"regime", to_string(rc.label)},
              {"b", rc.b},
              {"lambda_min_theta", rc.lambda_min_theta},
              {"lambda_max_theta", rc.lambda_max_theta}},
             out_path, out);
      }
    } else if (*simulate_cmd) {
      const ModelSpec spec = load_spec(config);
      const PathGrid path =
          simulate_path(spec, {horizon, dt, scheme_from_string(scheme), seed});
      save_path(path, out_path);
      out << "wrote " << path.size() << " points to " << out_path << "\n";
    } else if (*estimate_cmd) {
      if (rho_file.empty() == !estimate_diff) {
        err << "error: exactly one of --rho-known or --estimate-diffusion is required\n\n"
            << estimate_cmd->help();
        return kUsage;
      }
      if (restricted && config.empty()) {
        err << "error: --restricted needs --config for the known a and m\n\n"
            << estimate_cmd->help();
        return kUsage;
      }
      const PathGrid path = load_path(path_file);
      Mat rho;
      Json diffusion;
      if (estimate_diff) {
        const DiffusionEstimate de = estimate_diffusion(path);
        rho = de.rho_hat;
        diffusion = {{"s_hat", to_json(de.s_hat)}, {"rho_hat", to_json(de.rho_hat)}};
      } else {
        rho = load_rho(rho_file);
      }
      const std::string source = estimate_diff ? "estimated" : "known";
      Json j;
      if (restricted) {
        const ModelSpec spec = load_spec(config);
        RestrictedMleResult r = mle_restricted(path, rho, spec.a, spec.m, est_horizon);
        r.rho_source = source;
        j = to_json(r);
      } else {
        MleResult r = mle_full(path, rho, est_horizon);
        r.rho_source = source;
        j = to_json(r);
      }
      if (estimate_diff) j["diffusion_estimate"] = diffusion;
      j["path_spec_hash"] = path.spec_hash;
      emit(j, out_path, out);
    } else if (*cf_cmd) {
      const ModelSpec spec = load_spec(config);
      FLArgument arg{lambda, Vec::Zero(spec.n)};
      if (!mu_text.empty()) arg.mu = vec_from_json(Json(parse_list(mu_text, "--mu")), "mu");
      const Complex cf = stationary_cf(spec, arg, tol);
      const TailBound tb = tail_bound(spec, arg);
      emit({{"lambda", lambda},
            {"mu", to_json(arg.mu)},
            {"tol", tol},
            {"value", complex_json(cf)},
            {"tail_bound", {{"C1", tb.c1}, {"C2", tb.c2}}},
            {"truncation_horizon", truncation_horizon(spec, arg, tol)},
            {"spec_hash", spec_hash(spec)}},
           out_path, out);
    } else if (*ergodic_cmd) {
      const ModelSpec spec = load_spec(config);
      const PathGrid path = simulate_path(spec, {horizon, dt, Scheme::EulerFullTruncation, seed});
      Json avgs = Json::object();
      std::stringstream names(functionals.empty() ? "y,inv_y" : functionals);
      std::string name;
      while (std::getline(names, name, ',')) avgs[name] = ergodic_average(path, name);
      Json j = {{"T", horizon}, {"dt", dt}, {"seed", seed}, {"spec_hash", spec_hash(spec)},
                {"averages", avgs}};
      if (classify(spec).label == Regime::Subcritical && spec.a > 0.5 * spec.sigma_sq(0)) {
        const StationaryMoments sm = stationary_moments(spec);
        j["stationary"] = {{"y", sm.mean_y_inf}, {"inv_y", sm.inv_mean_y_inf}};
      }
      emit(j, out_path, out);
    } else if (*lyap_cmd) {
      const ModelSpec spec = load_spec(config);
      const LyapunovCertificate cert = lyapunov_certificate(spec, cert_c, cert_r);
      const DriftCheck dc =
          check_drift_condition(spec, cert, grid_max, grid_min, grid_max, grid_points);
      emit({{"c", cert.c},
            {"r", cert.r},
            {"d", cert.d},
            {"c1", cert.c1},
            {"c2", cert.c2},
            {"c3", to_json(cert.c3)},
            {"c4", to_json(cert.c4)},
            {"lambda_theta", cert.lambda_theta},
            {"c_upper", cert.c_upper},
            {"r_upper", cert.r_upper ? Json(*cert.r_upper) : Json("unbounded")},
            {"lattice", {{"points", dc.points},
                         {"violations", dc.violations},
                         {"worst_excess", dc.worst_excess}}},
            {"spec_hash", spec_hash(spec)}},
           out_path, out);
    } else if (*study_cmd) {
      StudyConfig cfg;
      cfg.spec = load_spec(config);
      cfg.mode = study_mode_from_string(mode);
      cfg.t_grid = parse_list(t_grid_text, "--T-grid");
      cfg.dt = dt;
      cfg.n_paths = n_paths;
      cfg.seed = seed;
      cfg.scheme = scheme_from_string(scheme);
      const StudyReport rep = run_study(cfg);
      emit(rep.to_json(), out_path, out);
      err << to_string(cfg.mode) << ": " << (rep.passed() ? "all checks pass" : "some checks fail")
          << "\n";
    }
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    // anything else stems from malformed input (files, numbers, JSON)
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace adkit
