#include "doctest.h"
#include "support.hpp"

#include <algorithm>
#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <filesystem>

#include "adkit/simulator.hpp"

using namespace adkit;
using adkit::testing::Gen;
using adkit::testing::max_abs;

namespace {

struct MeanSe {
  double mean, se;
};

MeanSe mean_se(const Vec& v) {
  const double m = v.mean();
  const double var = (v.array() - m).square().sum() / double(v.size() - 1);
  return {m, std::sqrt(var / double(v.size()))};
}

double cir_var(double a, double b, double s2, double y0, double t) {
  const double e = std::exp(-b * t);
  return y0 * s2 / b * (e - e * e) + a * s2 / (2 * b * b) * (1 - e) * (1 - e);
}

}  // namespace

TEST_CASE("philox known-answer vectors") {
  const PhiloxBlock zero = philox4x32_10({0, 0, 0, 0}, {0, 0});
  CHECK(zero == PhiloxBlock{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  const std::uint32_t f = 0xffffffffu;
  const PhiloxBlock ones = philox4x32_10({f, f, f, f}, {f, f});
  CHECK(ones == PhiloxBlock{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
}

TEST_CASE("philox streams are reproducible, distinct and well distributed") {
  PhiloxStream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  bool differ_stream = false, differ_seed = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a(), vb = b(), vc = c(), vd = d();
    CHECK(va == vb);
    differ_stream |= va != vc;
    differ_seed |= va != vd;
  }
  CHECK(differ_stream);
  CHECK(differ_seed);

  PhiloxStream s(7, 0);
  const int n = 200000;
  double sum = 0, sum2 = 0, usum = 0;
  int inside = 0, out_of_range = 0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    out_of_range += !(u > 0.0 && u < 1.0);
    usum += u;
    const double z = s.normal();
    sum += z;
    sum2 += z * z;
    inside += std::abs(z) < 1.959963984540054;
  }
  CHECK(out_of_range == 0);
  CHECK(std::abs(usum / n - 0.5) < 5 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(sum / n) < 5 / std::sqrt(double(n)));
  CHECK(std::abs(sum2 / n - 1) < 5 * std::sqrt(2.0 / n));
  CHECK(std::abs(inside / double(n) - 0.95) < 5 * std::sqrt(0.95 * 0.05 / n));
}

TEST_CASE("scheme names and step counts") {
  CHECK(scheme_from_string("exact-cir") == Scheme::ExactCIR);
  CHECK(to_string(Scheme::EulerFullTruncation) == "euler-full-truncation");
  CHECK_THROWS_AS(scheme_from_string("milstein"), ValidationError);
  CHECK(step_count({1.0, 0.25, Scheme::EulerFullTruncation, 0}) == 4);
  CHECK(step_count({1.0, 0.3, Scheme::EulerFullTruncation, 0}) == 4);
  CHECK_THROWS_AS(step_count({1.0, 0.0, Scheme::EulerFullTruncation, 0}), ValidationError);
  CHECK_THROWS_AS(step_count({-1.0, 0.1, Scheme::EulerFullTruncation, 0}), ValidationError);
  CHECK_THROWS_AS(step_count({1e6, 1e-6, Scheme::EulerFullTruncation, 0}), ValidationError);
}

TEST_CASE("simulated paths satisfy the grid invariants") {
  Gen g(21);
  for (int trial = 0; trial < 20; ++trial) {
    const ModelSpec s = g.spec(g.integer(1, 3), g.uniform(-0.5, 2), g.integer(-1, 1), true);
    if (!validate(s).empty()) continue;
    for (Scheme scheme : {Scheme::EulerFullTruncation, Scheme::ExactCIR}) {
      const SimConfig cfg{1.3, 0.1, scheme, std::uint64_t(trial)};
      const PathGrid p = simulate_path(s, cfg);
      CHECK_NOTHROW(p.check());
      CHECK(p.size() == 14);
      CHECK(p.horizon() == doctest::Approx(1.3));
      CHECK(p.times(13) - p.times(12) == doctest::Approx(0.1).epsilon(1e-9));
      const PathGrid q = simulate_path(s, {1.25, 0.1, scheme, 1});
      CHECK(q.size() == 14);
      CHECK(q.horizon() == 1.25);
      CHECK(q.times(13) - q.times(12) == doctest::Approx(0.05));
      CHECK_NOTHROW(q.check());
      CHECK(p.y(0) == s.y0);
      CHECK(max_abs(p.x.row(0).transpose() - s.x0) == 0.0);
      CHECK(p.spec_hash == spec_hash(s));
      CHECK(p.seed == std::uint64_t(trial));
      CHECK((p.y.array() >= 0).all());
    }
  }
}

TEST_CASE("full truncation keeps Y nonnegative when the Feller condition fails") {
  ModelSpec s = reference_subcritical_spec();
  s.a = 0.1;
  s.y0 = 0.05;
  const PathGrid p = simulate_path(s, {20.0, 0.05, Scheme::EulerFullTruncation, 5});
  CHECK((p.y.array() >= 0).all());
  CHECK((p.y.array() == 0).any());
  CHECK(p.x.allFinite());
  const PathGrid q = simulate_path(s, {20.0, 0.05, Scheme::ExactCIR, 5});
  CHECK((q.y.array() >= 0).all());
}

TEST_CASE("paths are deterministic and independent of the entry point") {
  const ModelSpec s = reference_supercritical_spec();
  for (Scheme scheme : {Scheme::EulerFullTruncation, Scheme::ExactCIR}) {
    const SimConfig cfg{2.0, 0.01, scheme, 99};
    const PathGrid p1 = simulate_path(s, cfg), p2 = simulate_path(s, cfg);
    CHECK(path_to_csv(p1) == path_to_csv(p2));
    const auto ens = simulate_ensemble(s, cfg, 5);
    REQUIRE(ens.size() == 5);
    CHECK(path_to_csv(ens[0]) == path_to_csv(p1));
    CHECK(path_to_csv(ens[3]) == path_to_csv(simulate_path(s, cfg, 3)));
    CHECK(path_to_csv(ens[3]) != path_to_csv(ens[4]));
    const EnsembleSnapshots snap = simulate_snapshots(s, cfg, 5, {0.0, 0.5, 2.0});
    for (int k = 0; k < 5; ++k) {
      CHECK(snap.y(k, 0) == s.y0);
      CHECK(snap.y(k, 1) == ens[k].y(50));
      CHECK(snap.y(k, 2) == ens[k].y(200));
      CHECK(snap.x[2](k, 0) == ens[k].x(200, 0));
    }
    CHECK_THROWS_AS(simulate_snapshots(s, cfg, 5, {0.005}), ValidationError);
  }
  CHECK(path_to_csv(simulate_path(s, {2.0, 0.01, Scheme::EulerFullTruncation, 1})) !=
        path_to_csv(simulate_path(s, {2.0, 0.01, Scheme::EulerFullTruncation, 2})));
}

TEST_CASE("Euler step draws d normals per step from its stream") {
  Gen g(22);
  const ModelSpec s = g.spec(2, 1.0, 1, false);
  PathStepper auto_step(s, Scheme::EulerFullTruncation, 17, 2);
  PathStepper manual(s, Scheme::EulerFullTruncation, 17, 2);
  PhiloxStream rng(17, 2);
  const double h = 0.01;
  for (int l = 0; l < 300; ++l) {
    Vec db(s.d());
    for (int i = 0; i < s.d(); ++i) db(i) = std::sqrt(h) * rng.normal();
    auto_step.step(h);
    manual.step(h, db);
    CHECK(auto_step.y() == manual.y());
    CHECK(max_abs(auto_step.x() - manual.x()) == 0.0);
  }
}

TEST_CASE("Euler mean has first-order weak error (common random numbers)") {
  ModelSpec s = reference_subcritical_spec();
  s.y0 = 10.0;
  const double horizon = 1.0;
  const std::vector<int> levels = {100, 200, 400, 800};
  const int fine = levels.back();
  const int paths = 20000;
  Mat y_end(paths, levels.size());
  Mat x_end(paths, levels.size());
  for (int k = 0; k < paths; ++k) {
    PhiloxStream rng(314, k);
    Mat db(s.d(), fine);
    for (int l = 0; l < fine; ++l)
      for (int i = 0; i < s.d(); ++i) db(i, l) = std::sqrt(horizon / fine) * rng.normal();
    for (std::size_t j = 0; j < levels.size(); ++j) {
      const int steps = levels[j], group = fine / steps;
      PathStepper st(s, Scheme::EulerFullTruncation, 0, 0);
      for (int l = 0; l < steps; ++l)
        st.step(horizon / steps, db.middleCols(l * group, group).rowwise().sum());
      y_end(k, j) = st.y();
      x_end(k, j) = st.x()(0);
    }
  }
  const double exact_y = mean_y(s, horizon, s.y0);
  const double exact_x = mean_x(s, horizon, s.y0, s.x0)(0);
  for (std::size_t j = 0; j < levels.size(); ++j) {
    const MeanSe my = mean_se(y_end.col(j)), mx = mean_se(x_end.col(j));
    CHECK(std::abs(my.mean - exact_y) < 3 * my.se + 0.1 / levels[j] * 10);
    CHECK(std::abs(mx.mean - exact_x) < 3 * mx.se + 0.1 / levels[j] * 10);
  }
  for (std::size_t j = 0; j + 2 < levels.size(); ++j) {
    const double d1 = y_end.col(j).mean() - y_end.col(j + 1).mean();
    const double d2 = y_end.col(j + 1).mean() - y_end.col(j + 2).mean();
    const double ratio = d1 / d2;
    CHECK(ratio >= 1.5);
    CHECK(ratio <= 3.0);
  }
}

TEST_CASE("exact CIR moments match the closed forms") {
  const ModelSpec s = reference_subcritical_spec();
  for (double t : {0.5, 2.0}) {
    const EnsembleSnapshots snap = simulate_snapshots(s, {t, t, Scheme::ExactCIR, 8}, 100000, {t});
    const MeanSe m = mean_se(snap.y.col(0));
    CHECK(std::abs(m.mean - mean_y(s, t, s.y0)) < 4 * m.se);
    const double var = (snap.y.col(0).array() - m.mean).square().sum() / (snap.y.rows() - 1);
    const double exact = cir_var(s.a, s.b, s.sigma_sq(0), s.y0, t);
    // the sample variance of a chi-square mixture has relative sd well below 2% here
    CHECK(var == doctest::Approx(exact).epsilon(0.03));
  }
}

TEST_CASE("exact CIR draws pass a KS test against the noncentral chi-square law") {
  ModelSpec s = reference_subcritical_spec();
  s.y0 = 0.7;
  const double t = 1.0;
  const int n = 100000;
  const EnsembleSnapshots snap = simulate_snapshots(s, {t, t, Scheme::ExactCIR, 9}, n, {t});
  const double s2 = s.sigma_sq(0);
  const double c = s2 * (1 - std::exp(-s.b * t)) / (4 * s.b);
  boost::math::non_central_chi_squared law(4 * s.a / s2, s.y0 * std::exp(-s.b * t) / c);
  std::vector<double> draws(snap.y.col(0).data(), snap.y.col(0).data() + n);
  std::sort(draws.begin(), draws.end());
  double ks = 0;
  for (int i = 0; i < n; ++i) {
    const double f = boost::math::cdf(law, draws[i] / c);
    ks = std::max({ks, std::abs(f - double(i) / n), std::abs(f - double(i + 1) / n)});
  }
  CHECK(ks < 1.63 / std::sqrt(double(n)));  // 1% level
}

TEST_CASE("CIR transition density") {
  Gen g(23);
  for (int trial = 0; trial < 15; ++trial) {
    const double a = g.uniform(0.2, 3), b = g.uniform(-0.5, 2), rho11 = g.uniform(0.3, 1.5);
    const double t = g.uniform(0.1, 3), y0 = g.uniform(0.1, 5);
    const double s2 = rho11 * rho11;
    const double c = b == 0 ? s2 * t / 4 : s2 * (1 - std::exp(-b * t)) / (4 * b);
    boost::math::non_central_chi_squared law(4 * a / s2, y0 * std::exp(-b * t) / c);
    for (double y : {0.05, 0.5, 1.0, 3.0, 8.0}) {
      const double expected = boost::math::pdf(law, y / c) / c;
      CHECK(cir_transition_density(a, b, rho11, t, y0, y) ==
            doctest::Approx(expected).epsilon(1e-9).scale(1e-300));
    }
    boost::math::quadrature::exp_sinh<double> quad;
    const double mass =
        quad.integrate([&](double y) { return cir_transition_density(a, b, rho11, t, y0, y); });
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-7));
  }
  CHECK(cir_transition_density(2, 1, 1, 1, 1, -1) == 0.0);
  CHECK(cir_transition_density(2, 1, 1, 1, 1, 1e300) == 0.0);
  CHECK(cir_transition_density(2, 800, 1, 1, 1, 0.0025) > 0.0);
  CHECK(cir_transition_density(2, 0, 1, 1, 1, 1) ==
        doctest::Approx(cir_transition_density(2, 1e-9, 1, 1, 1, 1)).epsilon(1e-7));
  CHECK_THROWS_AS(cir_transition_density(2, 1, 1, 0, 1, 1), ValidationError);
  CHECK_THROWS_AS(cir_transition_density(0, 1, 1, 1, 1, 1), ValidationError);
}

TEST_CASE("exact CIR keeps the X block correlated with Y") {
  ModelSpec s = reference_subcritical_spec();
  s.rho(1, 0) = 0.6;
  const PathGrid p = simulate_path(s, {200.0, 1e-3, Scheme::ExactCIR, 3});
  long double cov = 0, qv = 0, int_y = 0;
  for (Eigen::Index l = 0; l + 1 < p.size(); ++l) {
    const double dy = p.y(l + 1) - p.y(l), dx = p.x(l + 1, 0) - p.x(l, 0);
    cov += dy * dx;
    qv += dy * dy;
    int_y += p.y(l) * (p.times(l + 1) - p.times(l));
  }
  CHECK(double(qv / int_y) == doctest::Approx(1.0).epsilon(0.03));
  CHECK(double(cov / int_y) == doctest::Approx(0.6).epsilon(0.05));
}

TEST_CASE("CSV and sidecar round trip") {
  Gen g(24);
  const ModelSpec s = g.subcritical(3);
  const PathGrid p = simulate_path(s, {0.7, 0.05, Scheme::ExactCIR, 77});
  const std::string csv = path_to_csv(p);
  CHECK(csv.rfind("t,Y,X1,X2,X3\n", 0) == 0);
  const PathGrid back = path_from_csv(csv);
  CHECK(back.times == p.times);
  CHECK(back.y == p.y);
  CHECK(back.x == p.x);

  const Json meta = path_metadata(p);
  CHECK(meta.at("spec_hash") == p.spec_hash);
  CHECK(meta.at("seed") == 77);
  CHECK(meta.at("scheme") == "exact-cir");

  const auto dir = std::filesystem::temp_directory_path() / "adkit_sim_test";
  std::filesystem::create_directories(dir);
  const std::string file = (dir / "path.csv").string();
  save_path(p, file);
  CHECK(std::filesystem::exists(file + ".json"));
  const PathGrid loaded = load_path(file);
  CHECK(loaded.y == p.y);
  CHECK(loaded.spec_hash == p.spec_hash);
  CHECK(loaded.seed == 77);
  CHECK(loaded.scheme == Scheme::ExactCIR);
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(path_from_csv("t,Y,X1\n0,1,0\n0,1,0\n"), ValidationError);
  CHECK_THROWS_AS(path_from_csv("t,Y,X1\n0,-1,0\n"), ValidationError);
  CHECK_THROWS_AS(path_from_csv("t,Y,X1\n0,1\n"), ValidationError);
  CHECK_THROWS_AS(path_from_csv("a,b\n"), ValidationError);
  CHECK_THROWS_AS(load_path("/nonexistent/adkit.csv"), ValidationError);
}
