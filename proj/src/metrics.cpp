#include "binaural/metrics.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "binaural/errors.hpp"
#include "binaural/linalg.hpp"

namespace binaural {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_to_pi(double d) {
  while (d > kPi) d -= 2.0 * kPi;
  while (d <= -kPi) d += 2.0 * kPi;
  return d;
}

// Scalar e_s^T Rxu1 e_s without forming the matrix.
double rxu1_scalar(const Gammas& g, Complex a_s, Complex b_s, double delta) {
  const Complex cross = a_s * std::conj(b_s) * g.gamma_ab / (g.gamma_a * g.gamma_b);
  return (std::norm(a_s) / g.gamma_a + delta * delta * std::norm(b_s) / g.gamma_b -
          2.0 * delta * std::real(cross)) /
         (1.0 - g.psi);
}

double rxu3_scalar(const Gammas& g, Complex a_s, Complex b_s, double delta, double eta) {
  const Complex cross = a_s * std::conj(b_s) * g.gamma_ab / (g.gamma_a * g.gamma_b);
  return ((1.0 - eta * eta) * std::norm(a_s) / g.gamma_a +
          (delta * delta - eta * eta) * std::norm(b_s) / g.gamma_b -
          2.0 * (delta - eta * eta) * std::real(cross)) /
         (1.0 - g.psi);
}

Complex rxu3_cross(const Gammas& g, Complex a_l, Complex a_r, Complex b_l, Complex b_r,
                   double delta, double eta) {
  // e_L^T Rxu3 e_R with the Hermitian-part reading of the Re{.} matrix term.
  const Complex t = g.gamma_ab / (g.gamma_a * g.gamma_b);
  const Complex herm = 0.5 * (t * a_l * std::conj(b_r) + std::conj(t) * std::conj(a_r) * b_l);
  return ((1.0 - eta * eta) * a_l * std::conj(a_r) / g.gamma_a +
          (delta * delta - eta * eta) * b_l * std::conj(b_r) / g.gamma_b -
          2.0 * (delta - eta * eta) * herm) /
         (1.0 - g.psi);
}

void require_non_degenerate(const Gammas& g, const char* who) {
  if (g.psi >= 1.0 - kPsiDegenerate)
    throw DegenerateConstraints(std::string(who) + ": steering vectors are numerically collinear");
}

}  // namespace

double psd(const CMatrix& R, const CVector& w) {
  if (w.size() != R.rows()) throw DimensionMismatch("psd: vector length mismatch");
  const double value = std::real(w.dot(R * w));
  if (value < 0.0) {
    const double scale = R.cwiseAbs().maxCoeff();
    if (value >= -1e-12 * scale) return 0.0;
  }
  return value;
}

double snr(double p_signal, double p_noise) {
  if (!(p_noise > 0.0)) throw ZeroDenominator("snr: nonpositive denominator power");
  return p_signal / p_noise;
}

double ratio_db(double ratio) { return 10.0 * std::log10(ratio); }

double improvement_db(double ratio_out, double ratio_in) {
  return ratio_db(ratio_out) - ratio_db(ratio_in);
}

Complex itf_from_cov(const CMatrix& R, Index left, Index right) {
  if (left < 0 || right < 0 || left >= R.rows() || right >= R.rows())
    throw PreconditionError("itf_from_cov: reference index out of range");
  const Complex denom = R(right, left);
  if (denom == Complex(0.0, 0.0)) throw ZeroDenominator("itf_from_cov: zero cross power");
  return R(left, left) / denom;
}

Complex itf_from_filters(const CVector& w_left, const CVector& w_right, const CVector& steering) {
  if (w_left.size() != steering.size() || w_right.size() != steering.size())
    throw DimensionMismatch("itf_from_filters: length mismatch");
  const Complex denom = w_right.dot(steering);
  if (denom == Complex(0.0, 0.0)) throw ZeroDenominator("itf_from_filters: right output is zero");
  return w_left.dot(steering) / denom;
}

double ild(Complex itf) { return std::norm(itf); }

std::vector<double> itd_curve(std::span<const Complex> itf, int sample_rate_hz, int fft_len) {
  if (itf.empty()) throw PreconditionError("itd_curve: empty ITF curve");
  std::vector<double> itd(itf.size(), std::numeric_limits<double>::quiet_NaN());
  double unwrapped = 0.0, prev = 0.0;
  bool primed = false;
  for (size_t f = 0; f < itf.size(); ++f) {
    const Complex c = itf[f];
    if (std::isnan(c.real()) || std::isnan(c.imag())) continue;  // flagged bin
    const double raw = std::arg(c);
    if (primed)
      unwrapped += wrap_to_pi(raw - prev);
    else
      unwrapped = raw;
    prev = raw;
    primed = true;
    if (f == 0) continue;  // undefined at DC
    const double freq_hz = static_cast<double>(f) * sample_rate_hz / fft_len;
    itd[f] = unwrapped / (2.0 * kPi * freq_hz);
  }
  return itd;
}

Coherence ic_msc(const CMatrix& R_n, const CVector& w_left, const CVector& w_right) {
  const double p_left = psd(R_n, w_left);
  const double p_right = psd(R_n, w_right);
  if (!(p_left > 0.0) || !(p_right > 0.0))
    throw ZeroPowerChannel("ic_msc: zero output noise power on one channel");
  Coherence c;
  c.ic = w_left.dot(R_n * w_right) / std::sqrt(p_left * p_right);
  c.msc = std::min(std::norm(c.ic), 1.0);
  return c;
}

double msc_error(std::span<const double> msc_in, std::span<const double> msc_out) {
  if (msc_in.size() != msc_out.size()) throw LengthMismatch("msc_error: curve lengths differ");
  if (msc_in.size() < 2) throw PreconditionError("msc_error: need at least two bins");
  double acc = 0.0;
  for (size_t f = 1; f < msc_in.size(); ++f) acc += std::abs(msc_in[f] - msc_out[f]);
  return acc / static_cast<double>(msc_in.size() - 1);
}

CMatrix rxu_matrix(RxuKind kind, const CMatrix& R_n, const CVector& a, const CVector& b,
                   double delta, double eta) {
  const Gammas g = gammas(R_n, a, b);
  const CMatrix aa = a * a.adjoint();
  const CMatrix bb = b * b.adjoint();
  // psi ab^H / gamma_ab^* == gamma_ab ab^H / (gamma_a gamma_b); the Re{.} of
  // the paper is the Hermitian part, which keeps the matrix Hermitian.
  const CMatrix t = (g.gamma_ab / (g.gamma_a * g.gamma_b)) * (a * b.adjoint());
  const CMatrix herm2 = t + t.adjoint();  // 2 Re{psi ab^H / gamma_ab^*}

  switch (kind) {
    case RxuKind::BlcmvNoise: {
      require_non_degenerate(g, "rxu_matrix");
      return (aa / g.gamma_a + delta * delta * bb / g.gamma_b - delta * herm2) / (1.0 - g.psi);
    }
    case RxuKind::BmvdrNInterference: {
      const CMatrix n = (g.gamma_ab / g.gamma_a) * (a * b.adjoint());
      return (1.0 - eta) * (1.0 - eta) * (std::norm(g.gamma_ab) / (g.gamma_a * g.gamma_a)) * aa +
             eta * eta * bb + (eta - eta * eta) * (n + n.adjoint());
    }
    case RxuKind::BlcmvNNoise: {
      require_non_degenerate(g, "rxu_matrix");
      return ((1.0 - eta * eta) * aa / g.gamma_a +
              (delta * delta - eta * eta) * bb / g.gamma_b - (delta - eta * eta) * herm2) /
             (1.0 - g.psi);
    }
  }
  throw PreconditionError("rxu_matrix: unknown kind");
}

double predicted_out_snr(Algorithm algo, const BeamformerInputs& in, double p_x, Side side,
                         double delta, double eta) {
  const Gammas g = gammas(in.R_n, in.a, in.b);
  const Complex a_s = in.a_ref(side);
  const Complex b_s = in.b_ref(side);
  const Index s = in.ref(side);
  const double p_n_ref = std::real(in.R_n(s, s));

  switch (algo) {
    case Algorithm::Bmvdr:
      return p_x * g.gamma_a;
    case Algorithm::Blcmv:
      require_non_degenerate(g, "predicted_out_snr");
      return p_x * std::norm(a_s) / rxu1_scalar(g, a_s, b_s, delta);
    case Algorithm::BmvdrN: {
      const double p_n_out = (1.0 - eta * eta) * std::norm(a_s) / g.gamma_a + eta * eta * p_n_ref;
      return p_x * std::norm(a_s) / p_n_out;
    }
    case Algorithm::BlcmvN: {
      require_non_degenerate(g, "predicted_out_snr");
      const double p_n_out = eta * eta * p_n_ref + rxu3_scalar(g, a_s, b_s, delta, eta);
      return p_x * std::norm(a_s) / p_n_out;
    }
  }
  throw PreconditionError("predicted_out_snr: unknown algorithm");
}

double predicted_out_sir(Algorithm algo, const BeamformerInputs& in, double p_x, double p_u,
                         Side side, double delta, double eta) {
  const Complex a_s = in.a_ref(side);
  const Complex b_s = in.b_ref(side);

  switch (algo) {
    case Algorithm::Bmvdr: {
      const Gammas g = gammas(in.R_n, in.a, in.b);
      if (std::norm(g.gamma_ab) == 0.0) return std::numeric_limits<double>::infinity();
      return (p_x / p_u) * (g.gamma_a * g.gamma_a) / std::norm(g.gamma_ab);
    }
    case Algorithm::Blcmv:
    case Algorithm::BlcmvN: {
      if (delta == 0.0) throw ZeroDelta("predicted_out_sir: closed form undefined for delta = 0");
      const double sir_in = (p_x * std::norm(a_s)) / (p_u * std::norm(b_s));
      return sir_in / (delta * delta);
    }
    case Algorithm::BmvdrN: {
      const Gammas g = gammas(in.R_n, in.a, in.b);
      const Complex cross = a_s * std::conj(b_s) * g.gamma_ab / g.gamma_a;
      const double p_u_out = (1.0 - eta) * (1.0 - eta) *
                                 (std::norm(g.gamma_ab) / (g.gamma_a * g.gamma_a)) *
                                 std::norm(a_s) +
                             eta * eta * std::norm(b_s) + 2.0 * (eta - eta * eta) * std::real(cross);
      if (!(p_u_out > 0.0)) return std::numeric_limits<double>::infinity();
      return (p_x / p_u) * std::norm(a_s) / p_u_out;
    }
  }
  throw PreconditionError("predicted_out_sir: unknown algorithm");
}

Complex predicted_itf_bmvdr_n(const BeamformerInputs& in, double eta) {
  const Gammas g = gammas(in.R_n, in.a, in.b);
  const Complex ratio = g.gamma_ab / g.gamma_a;
  const Complex num = (1.0 - eta) * in.a(in.ref_left) * ratio + eta * in.b(in.ref_left);
  const Complex den = (1.0 - eta) * in.a(in.ref_right) * ratio + eta * in.b(in.ref_right);
  if (den == Complex(0.0, 0.0))
    throw ZeroDenominator("predicted_itf_bmvdr_n: zero right-channel response");
  return num / den;
}

double predicted_msc_bmvdr_n(const BeamformerInputs& in, double eta) {
  const Gammas g = gammas(in.R_n, in.a, in.b);
  const Complex a_l = in.a(in.ref_left);
  const Complex a_r = in.a(in.ref_right);
  const double c = (1.0 - eta * eta) / g.gamma_a;  // source PSD cancels
  const Complex num = c * a_l * std::conj(a_r) + eta * eta * in.R_n(in.ref_left, in.ref_right);
  const double den_l = c * std::norm(a_l) + eta * eta * std::real(in.R_n(in.ref_left, in.ref_left));
  const double den_r =
      c * std::norm(a_r) + eta * eta * std::real(in.R_n(in.ref_right, in.ref_right));
  if (!(den_l > 0.0) || !(den_r > 0.0))
    throw ZeroPowerChannel("predicted_msc_bmvdr_n: zero output noise power");
  return std::min(std::norm(num) / (den_l * den_r), 1.0);
}

Complex predicted_ic_blcmv_n(const BeamformerInputs& in, double delta, double eta) {
  const Gammas g = gammas(in.R_n, in.a, in.b);
  require_non_degenerate(g, "predicted_ic_blcmv_n");
  const Complex a_l = in.a(in.ref_left), a_r = in.a(in.ref_right);
  const Complex b_l = in.b(in.ref_left), b_r = in.b(in.ref_right);
  const double e2 = eta * eta;
  const Complex cross =
      e2 * in.R_n(in.ref_left, in.ref_right) + rxu3_cross(g, a_l, a_r, b_l, b_r, delta, eta);
  const double p_l =
      e2 * std::real(in.R_n(in.ref_left, in.ref_left)) + rxu3_scalar(g, a_l, b_l, delta, eta);
  const double p_r =
      e2 * std::real(in.R_n(in.ref_right, in.ref_right)) + rxu3_scalar(g, a_r, b_r, delta, eta);
  if (!(p_l > 0.0) || !(p_r > 0.0))
    throw ZeroPowerChannel("predicted_ic_blcmv_n: zero output noise power");
  return cross / std::sqrt(p_l * p_r);
}

double blcmv_n_noise_psd(const BeamformerInputs& in, Side side, double delta, double eta) {
  const Gammas g = gammas(in.R_n, in.a, in.b);
  require_non_degenerate(g, "blcmv_n_noise_psd");
  const Index s = in.ref(side);
  return eta * eta * std::real(in.R_n(s, s)) +
         rxu3_scalar(g, in.a_ref(side), in.b_ref(side), delta, eta);
}

double delta_opt(const BeamformerInputs& in, Side side) {
  const Gammas g = gammas(in.R_n, in.a, in.b);
  const Complex a_s = in.a_ref(side);
  const Complex b_s = in.b_ref(side);
  const double beta = std::norm(b_s) / g.gamma_b;
  if (!(beta > 0.0)) throw ZeroBeta("delta_opt: zero interferer reference entry");
  const double alpha = std::real(a_s * std::conj(b_s) * g.gamma_ab) / (g.gamma_a * g.gamma_b);
  return alpha / beta;
}

double eta_opt() { return 0.0; }

}  // namespace binaural
