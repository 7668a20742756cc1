#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "binaural/errors.hpp"
#include "binaural/metrics.hpp"
#include "test_util.hpp"

using namespace binaural;
using namespace binaural::testutil;

namespace {

constexpr double kPi = std::numbers::pi;

CVector unit(Index m, Index at) {
  CVector e = CVector::Zero(m);
  e(at) = 1.0;
  return e;
}

double filter_snr(const BeamformerInputs& in, double p_x, const CVector& w) {
  const double p_x_out = p_x * std::norm(w.dot(in.a));
  return p_x_out / std::real(w.dot(in.R_n * w));
}

double filter_sir(const BeamformerInputs& in, double p_x, double p_u, const CVector& w) {
  return (p_x * std::norm(w.dot(in.a))) / (p_u * std::norm(w.dot(in.b)));
}

}  // namespace

TEST_CASE("psd basics and triple-loop oracle") {
  CHECK(psd(CMatrix::Identity(3, 3), unit(3, 0)) == doctest::Approx(1.0));
  CHECK(psd(CMatrix::Identity(3, 3), CVector::Zero(3)) == 0.0);

  Rng rng(61);
  const CMatrix r = random_pd(rng, 4);
  const CVector w = random_vector(rng, 4);
  Complex want(0.0, 0.0);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) want += std::conj(w(i)) * r(i, j) * w(j);
  CHECK(std::abs(psd(r, w) - want.real()) < 1e-12 * std::abs(want.real()));

  // A tiny negative quadratic form clamps to zero.
  CMatrix eps = -1e-16 * CMatrix::Identity(2, 2);
  CHECK(psd(eps, unit(2, 0)) == 0.0);
}

TEST_CASE("snr and improvement") {
  CHECK(snr(1.0, 1.0) == doctest::Approx(1.0));
  CHECK(improvement_db(snr(10.0, 1.0), snr(1.0, 1.0)) == doctest::Approx(10.0));
  CHECK_THROWS_AS(snr(1.0, 0.0), ZeroDenominator);
}

TEST_CASE("itf basics") {
  Rng rng(62);
  CVector a = random_vector(rng, 4);
  a(2) = a(0);  // equal reference entries
  const Complex itf = a(0) / a(2);
  CHECK(std::abs(itf - Complex(1.0, 0.0)) < 1e-15);
  CHECK(ild(itf) == doctest::Approx(1.0));

  // Covariance form equals the entry ratio under the rank-1 model.
  const CMatrix r_x = 1.8 * (a * a.adjoint());
  const Complex got = itf_from_cov(r_x, 0, 2);
  CHECK(std::abs(got - a(0) / a(2)) < 1e-12 * std::abs(got));

  CHECK_THROWS_AS(itf_from_cov(CMatrix::Identity(4, 4), 0, 2), ZeroDenominator);
}

TEST_CASE("pure interaural delay gives a constant ITD curve") {
  const int fft_len = 256, fs = 16000;
  const double tau = 2.5e-4;  // left leads by 250 microseconds
  std::vector<Complex> itf(fft_len / 2 + 1);
  for (size_t f = 0; f < itf.size(); ++f) {
    const double freq = static_cast<double>(f) * fs / fft_len;
    itf[f] = std::polar(1.0, 2.0 * kPi * freq * tau);
  }
  const auto itd = itd_curve(itf, fs, fft_len);
  CHECK(std::isnan(itd[0]));
  for (size_t f = 1; f < itd.size(); ++f) CHECK(itd[f] == doctest::Approx(tau).epsilon(1e-9));
}

TEST_CASE("bmvdr maps the interferer cue onto the desired-source cue") {
  Rng rng(63);
  const BeamformerInputs in = random_instance(rng, 4);
  const CVector w_l = bmvdr(in.R_n, in.a, in.a_ref(Side::Left));
  const CVector w_r = bmvdr(in.R_n, in.a, in.a_ref(Side::Right));
  const Complex itf_u = itf_from_filters(w_l, w_r, in.b);
  const Complex want = in.a(in.ref_left) / in.a(in.ref_right);
  CHECK(std::abs(itf_u - want) < 1e-9 * std::abs(want));
}

TEST_CASE("ic_msc basics") {
  Rng rng(64);
  const CMatrix r = random_pd(rng, 4);
  const CVector w = random_vector(rng, 4);
  CHECK(ic_msc(r, w, w).msc == doctest::Approx(1.0).epsilon(1e-12));

  // Orthogonal filters under identity noise are fully incoherent.
  CHECK(ic_msc(CMatrix::Identity(4, 4), unit(4, 0), unit(4, 2)).msc == doctest::Approx(0.0));

  // BMVDR pair: output noise MSC collapses to 1.
  const BeamformerInputs in = random_instance(rng, 5);
  const CVector w_l = bmvdr(in.R_n, in.a, in.a_ref(Side::Left));
  const CVector w_r = bmvdr(in.R_n, in.a, in.a_ref(Side::Right));
  CHECK(ic_msc(in.R_n, w_l, w_r).msc == doctest::Approx(1.0).epsilon(1e-9));

  CHECK_THROWS_AS(ic_msc(r, CVector::Zero(4), w), ZeroPowerChannel);
}

TEST_CASE("msc_error") {
  std::vector<double> same{0.2, 0.4, 0.9};
  CHECK(msc_error(same, same) == 0.0);
  std::vector<double> ones{1.0, 1.0, 1.0, 1.0}, zeros{0.0, 0.0, 0.0, 0.0};
  CHECK(msc_error(ones, zeros) == doctest::Approx(1.0));

  Rng rng(65);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> in(17), out(17);
  for (size_t i = 0; i < in.size(); ++i) {
    in[i] = unif(rng);
    out[i] = unif(rng);
  }
  double want = 0.0;
  for (size_t f = 1; f < in.size(); ++f) want += std::abs(in[f] - out[f]);
  want /= static_cast<double>(in.size() - 1);
  CHECK(msc_error(in, out) == doctest::Approx(want).epsilon(1e-14));

  CHECK_THROWS_AS(msc_error(ones, same), LengthMismatch);
}

TEST_CASE("rxu matrices: relations and limits") {
  Rng rng(66);
  const BeamformerInputs in = random_instance(rng, 4);
  const double delta = 0.45, eta = 0.3;

  const CMatrix rxu1 = rxu_matrix(RxuKind::BlcmvNoise, in.R_n, in.a, in.b, delta, 0.0);
  const CMatrix rxu1_full = rxu_matrix(RxuKind::BlcmvNoise, in.R_n, in.a, in.b, 1.0, 0.0);
  const CMatrix rxu3 = rxu_matrix(RxuKind::BlcmvNNoise, in.R_n, in.a, in.b, delta, eta);

  CHECK(is_hermitian(rxu1, 1e-10));
  CHECK(is_hermitian(rxu3, 1e-10));

  // eta = 0 collapses Rxu3 to Rxu1.
  const CMatrix rxu3_eta0 = rxu_matrix(RxuKind::BlcmvNNoise, in.R_n, in.a, in.b, delta, 0.0);
  CHECK((rxu3_eta0 - rxu1).cwiseAbs().maxCoeff() < 1e-12 * rxu1.cwiseAbs().maxCoeff());

  // eta = 1, delta = 1: no beamforming, the residual matrix vanishes.
  const CMatrix zero = rxu_matrix(RxuKind::BlcmvNNoise, in.R_n, in.a, in.b, 1.0, 1.0);
  CHECK(zero.cwiseAbs().maxCoeff() < 1e-12 * rxu1.cwiseAbs().maxCoeff());

  // Rxu3 = Rxu1(delta) - eta^2 Rxu1(delta = 1).
  const CMatrix relation = rxu1 - eta * eta * rxu1_full;
  CHECK((rxu3 - relation).cwiseAbs().maxCoeff() < 1e-10 * rxu1.cwiseAbs().maxCoeff());
}

TEST_CASE("appendix identity: closed-form output noise PSD vs quadratic form") {
  Rng rng(67);
  for (int trial = 0; trial < 40; ++trial) {
    const BeamformerInputs in = random_instance(rng, 4);
    const double delta = 0.1 + 0.9 * (trial / 40.0), eta = 0.85 * (trial / 40.0);

    const CMatrix rxu3 = rxu_matrix(RxuKind::BlcmvNNoise, in.R_n, in.a, in.b, delta, eta);
    const CMatrix closed = eta * eta * in.R_n + rxu3;

    const BeamformerPair pair = compute_pair(in, Algorithm::BlcmvN, delta, eta);
    const Complex e_l_e_l = closed(in.ref_left, in.ref_left);
    const Complex e_l_e_r = closed(in.ref_left, in.ref_right);
    const Complex e_r_e_r = closed(in.ref_right, in.ref_right);

    const double direct_ll = std::real(pair.w_left.dot(in.R_n * pair.w_left));
    const Complex direct_lr = pair.w_left.dot(in.R_n * pair.w_right);
    const double direct_rr = std::real(pair.w_right.dot(in.R_n * pair.w_right));

    CHECK(rel_error(e_l_e_l.real(), direct_ll) < 1e-9);
    CHECK(std::abs(e_l_e_r - direct_lr) < 1e-9 * std::abs(direct_lr));
    CHECK(rel_error(e_r_e_r.real(), direct_rr) < 1e-9);

    // Mixture PSD identity through the delta = 1 beamformer.
    const CVector w_d1 = blcmv(in.R_n, in.a, in.b, in.a(in.ref_left), in.b(in.ref_left), 1.0);
    const CVector w_d = blcmv(in.R_n, in.a, in.b, in.a(in.ref_left), in.b(in.ref_left), delta);
    const double p_in = std::real(in.R_n(in.ref_left, in.ref_left));
    const double p_d1 = std::real(w_d1.dot(in.R_n * w_d1));
    const double p_d = std::real(w_d.dot(in.R_n * w_d));
    const double simons = eta * eta * (p_in - p_d1) + p_d;
    CHECK(rel_error(direct_ll, simons) < 1e-9);
  }
}

TEST_CASE("predicted output SNR matches the filter route") {
  Rng rng(68);
  const double p_x = 1.3;
  CVector e1 = unit(3, 0);

  // BMVDR with identity noise and a = e_1: gamma_a = 1, SNR = p_x.
  BeamformerInputs trivial;
  trivial.R_n = CMatrix::Identity(3, 3);
  trivial.a = e1;
  trivial.b = unit(3, 1);
  trivial.ref_left = 0;
  trivial.ref_right = 1;
  CHECK(predicted_out_snr(Algorithm::Bmvdr, trivial, 1.0, Side::Left, 1.0, 0.0) ==
        doctest::Approx(1.0));

  for (int trial = 0; trial < 30; ++trial) {
    const BeamformerInputs in = random_instance(rng, 4);
    const double delta = 0.2 + 0.8 * (trial / 30.0), eta = 0.9 * (trial / 30.0);
    for (Algorithm algo :
         {Algorithm::Bmvdr, Algorithm::Blcmv, Algorithm::BmvdrN, Algorithm::BlcmvN}) {
      for (Side side : {Side::Left, Side::Right}) {
        const CVector w = compute_filter(in, algo, side, delta, eta);
        const double want = filter_snr(in, p_x, w);
        const double got = predicted_out_snr(algo, in, p_x, side, delta, eta);
        CHECK(rel_error(got, want) < 1e-8);
      }
    }
    // eta = 0 reduces the blcmv-n prediction to the blcmv prediction.
    CHECK(predicted_out_snr(Algorithm::BlcmvN, in, p_x, Side::Left, delta, 0.0) ==
          doctest::Approx(predicted_out_snr(Algorithm::Blcmv, in, p_x, Side::Left, delta, 0.0))
              .epsilon(1e-12));
  }
}

TEST_CASE("predicted output SIR: the 1/delta^2 law and the BMVDR-N form") {
  Rng rng(69);
  const double p_x = 0.8, p_u = 2.0;

  // delta = 0.3 improves the SIR by about 10.46 dB, independent of eta.
  const BeamformerInputs in = random_instance(rng, 4);
  const double sir_in =
      p_x * std::norm(in.a(in.ref_left)) / (p_u * std::norm(in.b(in.ref_left)));
  const double out = predicted_out_sir(Algorithm::BlcmvN, in, p_x, p_u, Side::Left, 0.3, 0.55);
  const double improvement = ratio_db(out) - ratio_db(sir_in);
  CHECK(improvement == doctest::Approx(10.4575749056).epsilon(1e-9));
  CHECK(predicted_out_sir(Algorithm::Blcmv, in, p_x, p_u, Side::Left, 1.0, 0.0) ==
        doctest::Approx(sir_in).epsilon(1e-12));
  CHECK_THROWS_AS(predicted_out_sir(Algorithm::Blcmv, in, p_x, p_u, Side::Left, 0.0, 0.0),
                  ZeroDelta);

  for (int trial = 0; trial < 30; ++trial) {
    const BeamformerInputs inst = random_instance(rng, 4);
    const double eta = 0.85 * (trial / 30.0);
    for (Side side : {Side::Left, Side::Right}) {
      // BMVDR-N prediction vs the filter route.
      const CVector w = compute_filter(inst, Algorithm::BmvdrN, side, 1.0, eta);
      const double want = filter_sir(inst, p_x, p_u, w);
      const double got = predicted_out_sir(Algorithm::BmvdrN, inst, p_x, p_u, side, 1.0, eta);
      CHECK(rel_error(got, want) < 1e-8);

      // Filter-based BLCMV/BLCMV-N improvement is exactly 1/delta^2.
      const double delta = 0.25 + 0.5 * (trial / 30.0);
      const CVector wl = compute_filter(inst, Algorithm::Blcmv, side, delta, 0.0);
      const CVector wn = compute_filter(inst, Algorithm::BlcmvN, side, delta, eta);
      const double sin_side =
          p_x * std::norm(inst.a_ref(side)) / (p_u * std::norm(inst.b_ref(side)));
      CHECK(std::abs(ratio_db(filter_sir(inst, p_x, p_u, wl)) - ratio_db(sin_side) +
                     20.0 * std::log10(delta)) < 1e-6);
      CHECK(std::abs(ratio_db(filter_sir(inst, p_x, p_u, wn)) - ratio_db(sin_side) +
                     20.0 * std::log10(delta)) < 1e-6);
    }
  }
}

TEST_CASE("bmvdr-n closed-form cues match the filter route") {
  Rng rng(70);
  for (int trial = 0; trial < 25; ++trial) {
    const BeamformerInputs in = random_instance(rng, 4);

    // eta = 1: input cues are preserved.
    const Complex itf_in_u = in.b(in.ref_left) / in.b(in.ref_right);
    CHECK(std::abs(predicted_itf_bmvdr_n(in, 1.0) - itf_in_u) < 1e-10 * std::abs(itf_in_u));
    const double p_ll = std::real(in.R_n(in.ref_left, in.ref_left));
    const double p_rr = std::real(in.R_n(in.ref_right, in.ref_right));
    const double msc_in = std::norm(in.R_n(in.ref_left, in.ref_right)) / (p_ll * p_rr);
    CHECK(predicted_msc_bmvdr_n(in, 1.0) == doctest::Approx(msc_in).epsilon(1e-10));

    // eta = 0: the undesired cue collapses onto the desired-source cue.
    const Complex itf_x = in.a(in.ref_left) / in.a(in.ref_right);
    CHECK(std::abs(predicted_itf_bmvdr_n(in, 0.0) - itf_x) < 1e-10 * std::abs(itf_x));

    // Midpoint eta against explicitly computed filters.
    const double eta = 0.5;
    const BeamformerPair pair = compute_pair(in, Algorithm::BmvdrN, 1.0, eta);
    const Complex got_itf = predicted_itf_bmvdr_n(in, eta);
    const Complex want_itf = itf_from_filters(pair.w_left, pair.w_right, in.b);
    CHECK(std::abs(got_itf - want_itf) < 1e-8 * std::abs(want_itf));
    const double want_msc = ic_msc(in.R_n, pair.w_left, pair.w_right).msc;
    CHECK(rel_error(predicted_msc_bmvdr_n(in, eta), want_msc) < 1e-8);
  }
}

TEST_CASE("blcmv-n closed-form noise coherence matches the filter route") {
  Rng rng(71);
  for (int trial = 0; trial < 25; ++trial) {
    const BeamformerInputs in = random_instance(rng, 4);
    const double delta = 0.15 + 0.7 * (trial / 25.0), eta = 0.8 * (trial / 25.0);

    const Complex got = predicted_ic_blcmv_n(in, delta, eta);
    const BeamformerPair pair = compute_pair(in, Algorithm::BlcmvN, delta, eta);
    const Complex want = ic_msc(in.R_n, pair.w_left, pair.w_right).ic;
    CHECK(std::abs(got - want) < 1e-8 * std::abs(want));

    // eta = 0: BLCMV noise MSC, strictly below 1.
    const double msc0 = std::norm(predicted_ic_blcmv_n(in, delta, 0.0));
    CHECK(msc0 < 1.0);
  }

  // eta = 1, delta = 1: input coherence comes through unchanged.
  const BeamformerInputs in = random_instance(rng, 4);
  const Complex ic_in = in.R_n(in.ref_left, in.ref_right) /
                        std::sqrt(std::real(in.R_n(in.ref_left, in.ref_left)) *
                                  std::real(in.R_n(in.ref_right, in.ref_right)));
  CHECK(std::abs(predicted_ic_blcmv_n(in, 1.0, 1.0) - ic_in) < 1e-10 * std::abs(ic_in));
}

TEST_CASE("delta_opt: orthogonal interferer, sweep oracle, errors") {
  Rng rng(72);

  // gamma_ab = 0 makes the optimum zero: orthogonal steering under identity noise.
  BeamformerInputs ortho;
  ortho.R_n = CMatrix::Identity(4, 4);
  ortho.a = unit(4, 0) + unit(4, 2);
  ortho.b = unit(4, 0) - unit(4, 2);
  ortho.ref_left = 0;
  ortho.ref_right = 1;
  CHECK(delta_opt(ortho, Side::Left) == doctest::Approx(0.0));

  // Grid sweep: the closed form maximizes the predicted SNR.
  for (int trial = 0; trial < 10; ++trial) {
    const BeamformerInputs in = random_instance(rng, 4);
    const double opt = delta_opt(in, Side::Left);
    double best = -1.0, best_delta = 0.0;
    for (double d = -3.0; d <= 3.0; d += 1e-3) {
      const double val = predicted_out_snr(Algorithm::Blcmv, in, 1.0, Side::Left, d, 0.0);
      if (val > best) {
        best = val;
        best_delta = d;
      }
    }
    CHECK(std::abs(opt - best_delta) <= 1e-3 + 1e-9);
  }

  // b with a zero reference entry has no optimum on that side.
  BeamformerInputs zero_b = ortho;
  zero_b.b = unit(4, 1);
  zero_b.ref_left = 0;
  zero_b.b(0) = 0.0;
  CHECK_THROWS_AS(delta_opt(zero_b, Side::Left), ZeroBeta);
}

TEST_CASE("eta_opt is zero and the SNR denominator is monotone in eta") {
  CHECK(eta_opt() == 0.0);
  Rng rng(73);
  for (int trial = 0; trial < 20; ++trial) {
    const BeamformerInputs in = random_instance(rng, 4);
    const double delta = 0.1 + 0.8 * (trial / 20.0);
    double prev = blcmv_n_noise_psd(in, Side::Left, delta, 0.0);
    for (double eta = 0.1; eta <= 1.0 + 1e-12; eta += 0.1) {
      const double cur = blcmv_n_noise_psd(in, Side::Left, delta, eta);
      CHECK(cur >= prev - 1e-12 * std::abs(prev));
      prev = cur;
    }
    CHECK(blcmv_n_noise_psd(in, Side::Left, delta, 0.5) >=
          blcmv_n_noise_psd(in, Side::Left, delta, 0.0) - 1e-12);
  }
}

TEST_CASE("SNR ordering chain on random instances") {
  Rng rng(74);
  for (int trial = 0; trial < 20; ++trial) {
    const BeamformerInputs in = random_instance(rng, 4);
    for (double delta = 0.1; delta <= 1.0 + 1e-12; delta += 0.3)
      for (double eta = 0.0; eta <= 1.0 + 1e-12; eta += 0.25)
        for (Side side : {Side::Left, Side::Right}) {
          const double s_bmvdr = predicted_out_snr(Algorithm::Bmvdr, in, 1.0, side, delta, eta);
          const double s_blcmv = predicted_out_snr(Algorithm::Blcmv, in, 1.0, side, delta, eta);
          const double s_blcmvn = predicted_out_snr(Algorithm::BlcmvN, in, 1.0, side, delta, eta);
          const double s_bmvdrn = predicted_out_snr(Algorithm::BmvdrN, in, 1.0, side, delta, eta);
          CHECK(s_blcmvn <= s_blcmv * (1.0 + 1e-10));
          CHECK(s_blcmv <= s_bmvdr * (1.0 + 1e-10));
          CHECK(s_bmvdrn <= s_bmvdr * (1.0 + 1e-10));
        }
  }
}

TEST_CASE("cue preservation across the four algorithms") {
  Rng rng(75);
  for (int trial = 0; trial < 20; ++trial) {
    const BeamformerInputs in = random_instance(rng, 4);
    const double delta = 0.4, eta = 0.35;
    const Complex itf_x_in = in.a(in.ref_left) / in.a(in.ref_right);
    const Complex itf_u_in = in.b(in.ref_left) / in.b(in.ref_right);
    for (Algorithm algo :
         {Algorithm::Bmvdr, Algorithm::Blcmv, Algorithm::BmvdrN, Algorithm::BlcmvN}) {
      const BeamformerPair pair = compute_pair(in, algo, delta, eta);
      const Complex itf_x = itf_from_filters(pair.w_left, pair.w_right, in.a);
      CHECK(std::abs(itf_x - itf_x_in) <= 1e-9 * std::abs(itf_x_in));
      if (algo == Algorithm::Blcmv || algo == Algorithm::BlcmvN) {
        const Complex itf_u = itf_from_filters(pair.w_left, pair.w_right, in.b);
        CHECK(std::abs(itf_u - itf_u_in) <= 1e-9 * std::abs(itf_u_in));
      }
    }
  }
}
