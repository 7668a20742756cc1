// metrics.hpp
// Objective performance measures (SNR/SIR, ITF/ILD/ITD, IC/MSC) and the
// closed-form predictions for each beamformer: output PSDs via the residual
// matrices, the SIR law, the BMVDR-N cue formulas, the BLCMV-N noise
// coherence, and the SNR-optimal parameter settings.

#ifndef BINAURAL_METRICS_HPP
#define BINAURAL_METRICS_HPP

#include <span>
#include <vector>

#include "binaural/beamformers.hpp"
#include "binaural/types.hpp"

namespace binaural {

// Re{w^H R w}; values within -1e-12 ||R|| of zero clamp to 0.
double psd(const CMatrix& R, const CVector& w);

// Linear power ratio; throws ZeroDenominator for a nonpositive denominator.
double snr(double p_signal, double p_noise);

double ratio_db(double ratio);
double improvement_db(double ratio_out, double ratio_in);

// Input interaural transfer function from a covariance matrix:
//   e_L^T R e_L / e_R^T R e_L  (equals a_L / a_R under the rank-1 model).
Complex itf_from_cov(const CMatrix& R, Index left, Index right);

// Output ITF of a coherent source: w_L^H v / w_R^H v.
Complex itf_from_filters(const CVector& w_left, const CVector& w_right, const CVector& steering);

double ild(Complex itf);

// Per-bin interaural time difference, seconds, from cumulatively unwrapped
// ITF phase; entry 0 is NaN (undefined at DC).
std::vector<double> itd_curve(std::span<const Complex> itf, int sample_rate_hz, int fft_len);

struct Coherence {
  Complex ic{0.0, 0.0};
  double msc = 0.0;  // |ic|^2 clamped to [0, 1]
};

// Interaural coherence of the noise component through a filter pair; pass
// selection vectors to obtain the input coherence.
Coherence ic_msc(const CMatrix& R_n, const CVector& w_left, const CVector& w_right);

// Frequency-averaged |MSC_in - MSC_out| over bins 1..F-1 (DC excluded).
double msc_error(std::span<const double> msc_in, std::span<const double> msc_out);

// Residual matrices behind the closed-form output PSDs.
enum class RxuKind {
  BlcmvNoise,          // output noise PSD of the BLCMV, depends on delta
  BmvdrNInterference,  // output interference PSD of the BMVDR-N, depends on eta
  BlcmvNNoise,         // BLCMV-N noise residual, depends on delta and eta
};

CMatrix rxu_matrix(RxuKind kind, const CMatrix& R_n, const CVector& a, const CVector& b,
                   double delta, double eta);

// Closed-form output SNR/SIR (linear). p_x, p_u are the rank-1 source PSDs.
double predicted_out_snr(Algorithm algo, const BeamformerInputs& in, double p_x, Side side,
                         double delta, double eta);
double predicted_out_sir(Algorithm algo, const BeamformerInputs& in, double p_x, double p_u,
                         Side side, double delta, double eta);

// BMVDR-N closed forms: interferer ITF (left over right) and noise MSC.
Complex predicted_itf_bmvdr_n(const BeamformerInputs& in, double eta);
double predicted_msc_bmvdr_n(const BeamformerInputs& in, double eta);

// BLCMV-N closed-form noise interaural coherence.
Complex predicted_ic_blcmv_n(const BeamformerInputs& in, double delta, double eta);

// Output noise PSD of the BLCMV-N, e_s^T (eta^2 R_n + Rxu3) e_s. This is the
// quantity the SNR-optimal parameters minimize.
double blcmv_n_noise_psd(const BeamformerInputs& in, Side side, double delta, double eta);

// Interference scaling that maximizes the output SNR on the given side.
double delta_opt(const BeamformerInputs& in, Side side);

// Mixing parameter that maximizes the output SNR (always 0).
double eta_opt();

}  // namespace binaural

#endif
