#include "adkit/riccati.hpp"

#include <cmath>
#include <numbers>

#include "adkit/ode.hpp"

namespace adkit {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kMonitorTol = 1e-12;

// v_t = e^{-t theta^T} mu through theta = P D P^{-1}:
// e^{-t theta^T} = P^{-T} e^{-tD} P^T.
class ModalDecay {
 public:
  explicit ModalDecay(const Mat& theta) : sp_(spectrum(theta)) {
    left_ = sp_.inverse_modal.transpose();
  }

  Vec apply(double t, const Vec& mu) const {
    const Vec w = sp_.modal.transpose() * mu;
    return left_ * (w.array() * (-t * sp_.eigenvalues.array()).exp()).matrix();
  }

  Mat matrix(double t) const {
    return left_ * (-t * sp_.eigenvalues.array()).exp().matrix().asDiagonal() *
           sp_.modal.transpose();
  }

  const Spectrum& spectrum_() const { return sp_; }

 private:
  Spectrum sp_;
  Mat left_;
};

struct Field {
  double half_r2;
  double b;
  double rho11;
  Vec kappa;
  Vec rho_j1;
  Mat s;
  Vec w;       // P^T mu
  Mat left;    // P^{-T}
  Vec lambda;  // eigenvalues of theta

  Field(const ModelSpec& spec, const ModalDecay& decay, const Vec& mu)
      : half_r2(0.5 * spec.rho11() * spec.rho11()),
        b(spec.b),
        rho11(spec.rho11()),
        kappa(spec.kappa),
        rho_j1(spec.rho_j1()),
        s(spec.rho_jj() * spec.rho_jj().transpose()),
        w(decay.spectrum_().modal.transpose() * mu),
        left(decay.spectrum_().inverse_modal.transpose()),
        lambda(decay.spectrum_().eigenvalues) {}

  Complex operator()(double t, Complex k) const {
    const Vec v = left * (w.array() * (-t * lambda.array()).exp()).matrix();
    const double beta = rho_j1.dot(v);
    return half_r2 * k * k - (b - kI * (rho11 * beta)) * k - kI * kappa.dot(v) -
           0.5 * v.dot(s * v) - 0.5 * beta * beta;
  }
};

void check_mu(const ModelSpec& spec, const Vec& mu) {
  if (mu.size() != spec.n) throw ValidationError("riccati: mu must have n entries");
  if (!mu.allFinite()) throw ValidationError("riccati: mu must be finite");
}

template <typename F>
RiccatiSolution integrate_flow(const F& field, Complex u1, double horizon, double tol,
                               bool monitor) {
  if (!(horizon >= 0 && std::isfinite(horizon))) {
    throw ValidationError("riccati: horizon must be nonnegative and finite");
  }
  if (!(tol > 0)) throw ValidationError("riccati: tol must be positive");
  // state: (Re K, Im K, Re int K, Im int K)
  Vec y0(4);
  y0 << u1.real(), u1.imag(), 0.0, 0.0;
  auto rhs = [&](double t, const Vec& y) {
    const Complex k(y(0), y(1));
    const Complex f = field(t, k);
    Vec out(4);
    out << f.real(), f.imag(), y(0), y(1);
    return out;
  };
  RiccatiSolution sol;
  auto observe = [&](double t, const Vec& y) {
    if (monitor && y(0) > kMonitorTol) {
      throw NumericalError("riccati: Re K_t = " + std::to_string(y(0)) + " > 0 at t = " +
                           std::to_string(t) + " (integrator failure)");
    }
    sol.times.push_back(t);
    sol.values.emplace_back(y(0), y(1));
    sol.integral = Complex(y(2), y(3));
  };
  OdeOptions opt;
  opt.tol = tol;
  opt.initial_step = 1e-2;
  integrate_dopri(rhs, 0.0, horizon, y0, opt, observe);
  return sol;
}

bool is_subcritical(const ModelSpec& spec) {
  return classify(spec).label == Regime::Subcritical;
}

TailBound tail_bound_complex(const ModelSpec& spec, Complex u1, const Vec& mu) {
  require_valid(spec);
  check_mu(spec, mu);
  if (!is_subcritical(spec)) {
    throw ValidationError("tail_bound: requires b > 0 and theta positive definite");
  }
  const ModelSpec dec = decouple(spec);
  const Spectrum sp = spectrum(spec.theta);
  const double lmin = sp.min();
  const double k_theta = sp.modal_condition();
  const double mu_norm = mu.norm();
  const double r11 = spec.rho11();
  const Complex u1_dec = u1 + kI * (mu.dot(spec.rho_j1()) / r11);

  // int_0^t e^{-b(t-s)} e^{-lmin s} ds <= g
  const double gap = std::abs(spec.b - lmin);
  const double g = gap <= kSpectrumTol ? 2.0 / (std::numbers::e * spec.b) : 1.0 / gap;
  const Mat s = spec.rho_jj() * spec.rho_jj().transpose();

  TailBound out;
  out.c2 = std::min(lmin, 0.5 * spec.b);
  const double c3 = std::abs(u1_dec) + dec.kappa.norm() * k_theta * mu_norm * g;
  const double c4 = 0.5 * r11 * r11 * c3 * c3 + s.norm() * k_theta * k_theta * 0.5 * mu_norm * mu_norm;
  const double c5 = std::abs(u1_dec) + 2.0 * c4 / spec.b;
  out.c1 = std::sqrt(c5 * c5 + c3 * c3) + spec.rho_j1().norm() / r11 * k_theta * mu_norm;
  return out;
}

double truncation_for(const ModelSpec& spec, const TailBound& tb, double tol) {
  const double ratio = spec.a * tb.c1 / (tb.c2 * tol);
  return std::max(1.0, std::log(std::max(ratio, 1.0)) / tb.c2);
}

}  // namespace

Mat decay_matrix(const ModelSpec& spec, double t) {
  return ModalDecay(spec.theta).matrix(t);
}

Mat decay_matrix_kron(const ModelSpec& spec, double t) {
  const Mat e = decay_matrix(spec, t);
  return kron(e, e);
}

Complex riccati_rhs(const ModelSpec& spec, double t, Complex k, const FLArgument& arg) {
  check_mu(spec, arg.mu);
  const Mat theta_t = spec.theta.transpose();
  const Vec v = expm(Mat(-t * theta_t)) * arg.mu;
  const Mat s = spec.rho_jj() * spec.rho_jj().transpose();
  const Vec mu_mu = kron(arg.mu, arg.mu);
  const double quad = vec(s).dot(expm(Mat(-t * kron_sum(theta_t, theta_t))) * mu_mu);
  const double beta = spec.rho_j1().dot(v);
  const double r11 = spec.rho11();
  return 0.5 * r11 * r11 * k * k - (spec.b - kI * (r11 * beta)) * k -
         kI * spec.kappa.dot(v) - 0.5 * quad - 0.5 * beta * beta;
}

RiccatiSolution solve_riccati(const ModelSpec& spec, Complex u1, const Vec& mu,
                              double horizon, double tol) {
  require_valid(spec);
  check_mu(spec, mu);
  const ModalDecay decay(spec.theta);
  const Field field(spec, decay, mu);
  return integrate_flow(field, u1, horizon, tol, u1.real() <= 0.0);
}

RiccatiSolution solve_riccati(const ModelSpec& spec, const FLArgument& arg,
                              double horizon, double tol) {
  if (!(arg.lambda >= 0)) throw ValidationError("riccati: lambda must be nonnegative");
  RiccatiSolution sol = solve_riccati(spec, Complex(-arg.lambda, 0.0), arg.mu, horizon, tol);
  if (is_subcritical(spec)) sol.tail_bound = tail_bound(spec, arg);
  return sol;
}

TailBound tail_bound(const ModelSpec& spec, const FLArgument& arg) {
  if (!(arg.lambda >= 0)) throw ValidationError("tail_bound: lambda must be nonnegative");
  return tail_bound_complex(spec, Complex(-arg.lambda, 0.0), arg.mu);
}

double truncation_horizon(const ModelSpec& spec, const FLArgument& arg, double tol) {
  return truncation_for(spec, tail_bound(spec, arg), tol);
}

Complex stationary_transform(const ModelSpec& spec, Complex u1, const Vec& mu, double tol) {
  if (!(tol > 0)) throw ValidationError("stationary_cf: tol must be positive");
  if (u1.real() > 0) throw ValidationError("stationary_cf: Re u1 must be nonpositive");
  const TailBound tb = tail_bound_complex(spec, u1, mu);
  const double horizon = truncation_for(spec, tb, tol);
  const RiccatiSolution sol =
      solve_riccati(spec, u1, mu, horizon, std::max(1e-2 * tol, 1e-14));
  const Vec theta_inv_m = spec.theta.fullPivLu().solve(spec.m);
  return std::exp(spec.a * sol.integral + kI * mu.dot(theta_inv_m));
}

Complex stationary_cf(const ModelSpec& spec, const FLArgument& arg, double tol) {
  if (!(arg.lambda >= 0)) throw ValidationError("stationary_cf: lambda must be nonnegative");
  return stationary_transform(spec, Complex(-arg.lambda, 0.0), arg.mu, tol);
}

PsiFlow psi_system(const ModelSpec& spec, Complex u1, const CVec& u2, const CVec& u3,
                   double horizon, double tol) {
  require_valid(spec);
  if (spec.rho_j1().squaredNorm() != 0.0) {
    throw ValidationError("psi_system: requires rho_J1 = 0 (see decouple)");
  }
  const int n = spec.n;
  if (u2.size() != n || u3.size() != n * n) {
    throw ValidationError("psi_system: u2 needs n entries and u3 needs n^2");
  }
  const ModalDecay decay(spec.theta);
  const Spectrum& sp = decay.spectrum_();
  const Mat left = sp.inverse_modal.transpose();
  const Mat s = spec.rho_jj() * spec.rho_jj().transpose();
  // kappa^T psi2(t) = sum_k a2_k e^{-t l_k} w2_k, likewise for psi3 with
  // exponents l_i + l_k.
  const CVec w2 = sp.modal.transpose().cast<Complex>() * u2;
  const Vec a2 = left.transpose() * spec.kappa;
  const Mat pt = sp.modal.transpose();
  const CVec w3 = kron(pt, pt).cast<Complex>() * u3;
  const Vec a3 = kron(left, left).transpose() * vec(s);
  Vec l3(n * n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) l3(i * n + k) = sp.eigenvalues(i) + sp.eigenvalues(k);
  }
  const double half_r2 = 0.5 * spec.rho11() * spec.rho11();
  auto field = [&](double t, Complex k) {
    Complex forcing = 0.0;
    for (int i = 0; i < n; ++i) forcing += a2(i) * std::exp(-t * sp.eigenvalues(i)) * w2(i);
    for (int i = 0; i < n * n; ++i) forcing += a3(i) * std::exp(-t * l3(i)) * w3(i);
    return half_r2 * k * k - spec.b * k + forcing;
  };
  const RiccatiSolution sol = integrate_flow(field, u1, horizon, tol, false);
  PsiFlow out;
  out.times = sol.times;
  out.psi1 = sol.values;
  const Mat e = decay.matrix(horizon);
  out.psi2 = e.cast<Complex>() * u2;
  out.psi3 = kron(e, e).cast<Complex>() * u3;
  return out;
}

}  // namespace adkit
