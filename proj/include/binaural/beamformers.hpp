// beamformers.hpp
// Closed-form binaural beamformers per frequency bin. All functions accept
// either ATF vectors with explicit reference entries or RTF vectors whose
// reference entry is 1; the reference entries are always read from the
// supplied scalars, so both modes share one code path. Filters are invariant
// to a global rescaling of the steering vector together with its reference
// entry.

#ifndef BINAURAL_BEAMFORMERS_HPP
#define BINAURAL_BEAMFORMERS_HPP

#include "binaural/types.hpp"

namespace binaural {

// Threshold on the normalized coupling psi beyond which the two-constraint
// system is treated as singular.
inline constexpr double kPsiDegenerate = 1e-8;

// Whitened inner products of the steering vectors:
//   gamma_a  = a^H R_n^{-1} a,   gamma_b = b^H R_n^{-1} b,
//   gamma_ab = a^H R_n^{-1} b,   psi     = |gamma_ab|^2 / (gamma_a gamma_b).
struct Gammas {
  double gamma_a = 0.0;
  double gamma_b = 0.0;
  Complex gamma_ab{0.0, 0.0};
  double psi = 0.0;  // in [0, 1] by Cauchy-Schwarz; raw value, not clamped
};

Gammas gammas(const CMatrix& R_n, const CVector& a, const CVector& b);

// Minimum output noise power subject to w^H a = a_ref:
//   w = R_n^{-1} a a_ref^* / gamma_a.
CVector bmvdr(const CMatrix& R_n, const CVector& a, Complex a_ref);

// Minimum output noise power subject to w^H a = a_ref and w^H b = delta b_ref.
CVector blcmv(const CMatrix& R_n, const CVector& a, const CVector& b, Complex a_ref,
              Complex b_ref, double delta);

// Partial noise estimation variant: w = (1-eta) bmvdr + eta e_ref.
CVector bmvdr_n(const CMatrix& R_n, const CVector& a, Complex a_ref, Index ref_index,
                double eta);

// Adjusted interference scaling (delta - eta) / (1 - eta); requires eta < 1.
double adjusted_delta(double delta, double eta);

// Partial noise estimation with the interference constraint. Equals
// eta e_ref + (1-eta) blcmv(adjusted_delta) for eta < 1; for eta == 1 the
// only feasible case is delta == 1 (no beamforming, w = e_ref).
CVector blcmv_n(const CMatrix& R_n, const CVector& a, const CVector& b, Complex a_ref,
                Complex b_ref, Index ref_index, double delta, double eta);

// Sub-beamformer split: w_x preserves the desired source and nulls the
// interferer, w_u does the opposite; blcmv(delta) = w_x + delta w_u.
struct SubBlcmv {
  CVector w_x;
  CVector w_u;
};
SubBlcmv decompose_sub_blcmv(const CMatrix& R_n, const CVector& a, const CVector& b,
                             Complex a_ref, Complex b_ref);

// Common spatial filters with binauralization postfilters:
//   w_x^H a = 1, w_x^H b = 0 (and vice versa); the side filters are
//   w_{x,side} = w_x a_side^*, w_{u,side} = w_u b_side^*.
struct CommonFilters {
  CVector w_x;
  CVector w_u;
};
CommonFilters common_filters(const CMatrix& R_n, const CVector& a, const CVector& b);

// Per-bin inputs shared by both sides.
struct BeamformerInputs {
  CMatrix R_n;
  CVector a;  // desired-source steering vector (ATF or RTF)
  CVector b;  // interferer steering vector
  Index ref_left = 0;
  Index ref_right = 0;

  Complex a_ref(Side s) const { return a(s == Side::Left ? ref_left : ref_right); }
  Complex b_ref(Side s) const { return b(s == Side::Left ? ref_left : ref_right); }
  Index ref(Side s) const { return s == Side::Left ? ref_left : ref_right; }
};

struct BeamformerPair {
  CVector w_left;
  CVector w_right;
  Algorithm algorithm = Algorithm::Bmvdr;
  double delta = 1.0;
  double eta = 0.0;
};

// One filter for the requested side.
CVector compute_filter(const BeamformerInputs& in, Algorithm algo, Side side, double delta,
                       double eta);

// Both sides at once.
BeamformerPair compute_pair(const BeamformerInputs& in, Algorithm algo, double delta,
                            double eta);

}  // namespace binaural

#endif
