#include "doctest.h"
#include "support.hpp"

#include <set>

#include "adkit/estimator.hpp"

using namespace adkit;
using adkit::testing::Gen;
using adkit::testing::max_abs;

namespace {

Vec drift(const ModelSpec& s, double y, const Vec& x) {
  Vec out(s.d());
  out << s.a - s.b * y, s.m - s.kappa * y - s.theta * x;
  return out;
}

// Deterministic Euler recursion: increments are exactly drift * h.
PathGrid noise_free_path(const ModelSpec& s, double horizon, double h) {
  const int steps = int(std::lround(horizon / h));
  PathGrid p;
  p.times = Vec::LinSpaced(steps + 1, 0.0, steps * h);
  p.y.resize(steps + 1);
  p.x.resize(steps + 1, s.n);
  p.y(0) = s.y0;
  p.x.row(0) = s.x0.transpose();
  for (int l = 0; l < steps; ++l) {
    const Vec dz = drift(s, p.y(l), p.x.row(l).transpose()) * h;
    p.y(l + 1) = p.y(l) + dz(0);
    p.x.row(l + 1) = p.x.row(l) + dz.tail(s.n).transpose();
  }
  p.dt = h;
  return p;
}

PathGrid prefix(const PathGrid& p, Eigen::Index points) {
  PathGrid out = p;
  out.times = p.times.head(points);
  out.y = p.y.head(points);
  out.x = p.x.topRows(points);
  return out;
}

PathGrid every_other(const PathGrid& p) {
  const Eigen::Index k = (p.size() + 1) / 2;
  PathGrid out = p;
  out.times.resize(k);
  out.y.resize(k);
  out.x.resize(k, p.n());
  for (Eigen::Index l = 0; l < k; ++l) {
    out.times(l) = p.times(2 * l);
    out.y(l) = p.y(2 * l);
    out.x.row(l) = p.x.row(2 * l);
  }
  out.dt = 2 * p.dt;
  return out;
}

Vec standard_errors(const Mat& info) { return info.inverse().diagonal().cwiseSqrt(); }

}  // namespace

TEST_CASE("design matrices reproduce the drift") {
  Gen g(41);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = g.integer(1, 4), d = n + 1;
    const ModelSpec s = g.spec(n, g.uniform(-1, 2), g.integer(-1, 1), trial % 2 == 0);
    const double y = g.uniform(0, 5);
    const Vec x = g.vec(n, 3.0);
    const Mat lam = lambda_matrix(y, x);
    CHECK(lam.rows() == d);
    CHECK(lam.cols() == d * d + 1);
    CHECK(max_abs(lam * tau_of(s) - drift(s, y, x)) < 1e-12);
    Vec c(d);
    c << s.a, s.m;
    const Mat lt = lambda_tilde(y, x);
    CHECK(lt.cols() == d * d - n);
    CHECK(max_abs(c - lt * tau_tilde_of(s) - drift(s, y, x)) < 1e-12);
    CHECK(with_tau(s, tau_of(s)) == s);
    CHECK(int(tau_labels(n).size()) == d * d + 1);
    CHECK(int(tau_tilde_labels(n).size()) == d * d - n);
    const auto labels = tau_labels(n);
    CHECK(std::set<std::string>(labels.begin(), labels.end()).size() == labels.size());
  }
  CHECK(tau_labels(1) == std::vector<std::string>{"a", "b", "m1", "kappa1", "theta11"});
  CHECK(tau_tilde_labels(2) ==
        std::vector<std::string>{"b", "kappa1", "theta11", "theta12", "kappa2", "theta21",
                                 "theta22"});
}

TEST_CASE("noise-free Euler path recovers the drift exactly") {
  ModelSpec s = reference_subcritical_spec();
  s.y0 = 5.0;
  s.x0 = Vec::Constant(1, 3.0);
  const PathGrid p = noise_free_path(s, 5.0, 1e-3);
  const MleResult r = mle_full(p, s.rho);
  CHECK(max_abs(r.tau_hat - tau_of(s)) < 1e-9);
  CHECK(r.condition_number < kMaxCondition);
  CHECK(r.horizon == doctest::Approx(5.0));
  CHECK(r.skipped_steps == 0);
  const RestrictedMleResult rr = mle_restricted(p, s.rho, s.a, s.m);
  CHECK(max_abs(rr.tau_tilde_hat - tau_tilde_of(s)) < 1e-9);

  Gen g(42);
  int ran = 0;
  for (int trial = 0; trial < 10; ++trial) {
    ModelSpec r2 = g.subcritical(2, trial % 2 == 0);
    r2.y0 = 5.0;
    r2.x0 = g.vec(2, 3.0);
    const PathGrid q = noise_free_path(r2, 4.0, 1e-3);
    try {
      const MleResult est = mle_full(q, r2.rho);
      CHECK(max_abs(est.tau_hat - tau_of(r2)) < 1e-6 * (1 + max_abs(tau_of(r2))));
      ++ran;
    } catch (const NumericalError&) {
      // a smooth three-dimensional trajectory can be too close to a plane
    }
  }
  CHECK(ran >= 7);
}

TEST_CASE("a smoother noise-free trajectory gives first-order error") {
  // the exact ODE solution is not an Euler path, so left-endpoint sums
  // leave an O(dt) bias
  ModelSpec s = reference_subcritical_spec();
  s.y0 = 5.0;
  s.x0 = Vec::Constant(1, 3.0);
  auto ode_path = [&](double h) {
    const int steps = int(std::lround(5.0 / h));
    PathGrid p = noise_free_path(s, 5.0, h);
    for (int l = 0; l <= steps; ++l) {
      const double t = l * h;
      p.y(l) = mean_y(s, t, s.y0);
      p.x.row(l) = mean_x(s, t, s.y0, s.x0).transpose();
    }
    return p;
  };
  const double e1 = max_abs(mle_full(ode_path(2e-3), s.rho).tau_hat - tau_of(s));
  const double e2 = max_abs(mle_full(ode_path(1e-3), s.rho).tau_hat - tau_of(s));
  CHECK(e1 < 0.05);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("estimates fall within their asymptotic standard errors") {
  const ModelSpec s = reference_subcritical_spec();
  const PathGrid p = simulate_path(s, {400.0, 1e-2, Scheme::EulerFullTruncation, 4});
  const MleResult r = mle_full(p, s.rho);
  const Vec se = standard_errors(r.info_matrix);
  const Vec z = (r.tau_hat - tau_of(s)).cwiseQuotient(se);
  CHECK(z.cwiseAbs().maxCoeff() < 4.0);
  const RestrictedMleResult rr = mle_restricted(p, s.rho, s.a, s.m);
  const Vec zr = (rr.tau_tilde_hat - tau_tilde_of(s)).cwiseQuotient(standard_errors(rr.info_matrix));
  CHECK(zr.cwiseAbs().maxCoeff() < 4.0);
}

TEST_CASE("supercritical restricted estimator") {
  const ModelSpec s = reference_supercritical_spec();
  const PathGrid p = simulate_path(s, {10.0, 1e-3, Scheme::EulerFullTruncation, 6});
  const RestrictedMleResult rr = mle_restricted(p, s.rho, s.a, s.m);
  CHECK(rr.condition_number < kMaxCondition);
  const Vec zr = (rr.tau_tilde_hat - tau_tilde_of(s)).cwiseQuotient(standard_errors(rr.info_matrix));
  CHECK(zr.cwiseAbs().maxCoeff() < 4.0);
  const Vec logs = log_normalizer(classify(s), s, 50.0);
  CHECK(logs.allFinite());
  CHECK(logs.size() == tau_tilde_of(s).size());
  CHECK_THROWS_AS(normalizer(classify(s), s, 5000.0), NumericalError);
}

TEST_CASE("estimators are equivariant under permutation of X") {
  Gen g(43);
  const ModelSpec s = g.subcritical(3, false);
  const PathGrid p = simulate_path(s, {50.0, 1e-2, Scheme::EulerFullTruncation, 8});
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(3);
  perm.indices() << 2, 0, 1;
  const Mat pm = perm.toDenseMatrix().cast<double>();
  Mat block = Mat::Identity(4, 4);
  block.bottomRightCorner(3, 3) = pm;

  PathGrid q = p;
  q.x = p.x * pm.transpose();
  const ModelSpec est = with_tau(s, mle_full(p, s.rho).tau_hat);
  const ModelSpec est_q = with_tau(s, mle_full(q, block * s.rho).tau_hat);
  CHECK(est_q.a == doctest::Approx(est.a).epsilon(1e-8));
  CHECK(est_q.b == doctest::Approx(est.b).epsilon(1e-8));
  CHECK(max_abs(est_q.m - pm * est.m) < 1e-8);
  CHECK(max_abs(est_q.kappa - pm * est.kappa) < 1e-8);
  CHECK(max_abs(est_q.theta - pm * est.theta * pm.transpose()) < 1e-8);
}

TEST_CASE("horizon selects a prefix of the path") {
  const ModelSpec s = reference_subcritical_spec();
  const PathGrid p = simulate_path(s, {40.0, 1e-2, Scheme::EulerFullTruncation, 9});
  const MleResult part = mle_full(p, s.rho, 25.0);
  const MleResult pre = mle_full(prefix(p, 2501), s.rho);
  CHECK(part.horizon == doctest::Approx(25.0));
  CHECK(max_abs(part.tau_hat - pre.tau_hat) == 0.0);
  CHECK(max_abs(part.info_matrix - pre.info_matrix) == 0.0);
  CHECK(mle_full(p, s.rho, 1e6).horizon == doctest::Approx(40.0));
}

TEST_CASE("halving the step does not move the estimate beyond its dispersion") {
  const ModelSpec s = reference_subcritical_spec();
  const PathGrid fine = simulate_path(s, {200.0, 5e-3, Scheme::EulerFullTruncation, 10});
  const MleResult r_fine = mle_full(fine, s.rho);
  const MleResult r_coarse = mle_full(every_other(fine), s.rho);
  const Vec se = standard_errors(r_fine.info_matrix);
  CHECK((r_fine.tau_hat - r_coarse.tau_hat).cwiseQuotient(se).cwiseAbs().maxCoeff() < 1.0);
}

TEST_CASE("information rate converges to its stationary limit") {
  const ModelSpec s = reference_subcritical_spec();
  const PathGrid p = simulate_path(s, {2000.0, 1e-2, Scheme::EulerFullTruncation, 11});
  const Mat rate = info_rate(p, s.rho);
  CHECK(rate(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(0.05));
  CHECK(rate(1, 1) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(rate(0, 1) == doctest::Approx(-1.0).epsilon(0.05));
  CHECK(max_abs(rate - rate.transpose()) == 0.0);
}

TEST_CASE("diffusion estimate") {
  const ModelSpec s = reference_subcritical_spec();
  const PathGrid p = simulate_path(s, {10.0, 1e-4, Scheme::EulerFullTruncation, 12});
  const DiffusionEstimate est = estimate_diffusion(p);
  CHECK(max_abs(est.s_hat - s.diffusion()) < 0.02);
  CHECK(max_abs(est.rho_hat * est.rho_hat.transpose() - est.s_hat) < 1e-12);
  CHECK(max_abs(Mat(est.rho_hat.triangularView<Eigen::StrictlyUpper>())) == 0.0);

  Gen g(44);
  const ModelSpec r = g.subcritical(2, true);
  const PathGrid q = simulate_path(r, {10.0, 1e-4, Scheme::EulerFullTruncation, 13});
  const DiffusionEstimate er = estimate_diffusion(q);
  const Mat target = r.diffusion();
  CHECK(max_abs(er.s_hat - target) < 0.03 * max_abs(target));

  // relabelling time by c divides the estimate by c
  PathGrid stretched = p;
  stretched.times *= 2.5;
  CHECK(max_abs(estimate_diffusion(stretched).s_hat - est.s_hat / 2.5) < 1e-12);

  PathGrid flat = p;
  flat.x.setZero();
  CHECK_THROWS_AS(estimate_diffusion(flat), NumericalError);
}

TEST_CASE("Y floor and degenerate paths") {
  const ModelSpec s = reference_subcritical_spec();
  PathGrid p = simulate_path(s, {100.0, 1e-2, Scheme::EulerFullTruncation, 14});
  PathGrid few = p;
  for (int l = 1000; l < 1005; ++l) few.y(l) = 0.0;
  const MleResult r = mle_full(few, s.rho);
  CHECK(r.skipped_steps == 5);
  PathGrid many = p;
  for (int l = 1000; l < 1100; ++l) many.y(l) = 0.0;
  CHECK_THROWS_AS(mle_full(many, s.rho), NumericalError);

  PathGrid frozen = p;
  frozen.y.setConstant(2.0);
  frozen.x.setConstant(0.5);
  CHECK_THROWS_AS(mle_full(frozen, s.rho), NumericalError);

  CHECK_THROWS_AS(mle_full(p, Mat::Identity(3, 3)), ValidationError);
  CHECK_THROWS_AS(mle_full(p, Mat::Zero(2, 2)), ValidationError);
  CHECK_THROWS_AS(mle_restricted(p, s.rho, s.a, Vec::Zero(2)), ValidationError);
  PathGrid bad = p;
  bad.y(3) = -1.0;
  CHECK_THROWS_AS(mle_full(bad, s.rho), ValidationError);
}

TEST_CASE("normalizers") {
  const ModelSpec s = reference_subcritical_spec();
  const Mat q = normalizer(classify(s), s, 400.0);
  CHECK(max_abs(q - 20.0 * Mat::Identity(5, 5)) < 1e-12);
  const ModelSpec sup = reference_supercritical_spec();
  const Mat qs = normalizer(classify(sup), sup, 10.0);
  CHECK(qs.rows() == 3);
  CHECK(max_abs(qs.diagonal().array().log().matrix() - log_normalizer(classify(sup), sup, 10.0)) <
        1e-12);
  ModelSpec crit = s;
  crit.b = 0.0;
  CHECK_THROWS_AS(normalizer(classify(crit), crit, 10.0), ValidationError);
  CHECK_THROWS_AS(normalizer(classify(s), s, 0.0), ValidationError);
}

TEST_CASE("result JSON") {
  const ModelSpec s = reference_subcritical_spec();
  const PathGrid p = simulate_path(s, {20.0, 1e-2, Scheme::EulerFullTruncation, 15});
  const Json j = to_json(mle_full(p, s.rho));
  CHECK(j.at("ordering") == kOrderingTag);
  CHECK(j.at("labels").size() == 5);
  CHECK(j.at("tau_hat").size() == 5);
  CHECK(j.at("rho_source") == "known");
  const Json jr = to_json(mle_restricted(p, s.rho, s.a, s.m));
  CHECK(jr.at("labels").size() == 3);
  CHECK(jr.at("known_c").at("a") == 2.0);
}
