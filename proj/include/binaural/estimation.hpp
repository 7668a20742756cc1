// estimation.hpp
// Covariance estimation from STFT frames under an oracle VAD, and
// covariance-whitening RTF estimation from (signal+noise, noise) pencils.

#ifndef BINAURAL_ESTIMATION_HPP
#define BINAURAL_ESTIMATION_HPP

#include <span>
#include <string>
#include <vector>

#include "binaural/stft.hpp"
#include "binaural/types.hpp"

namespace binaural {

// Frame labels: 0 = noise only, 1 = desired + noise, 2 = interferer(+noise).
enum VadClass : int {
  kVadNoiseOnly = 0,
  kVadDesiredPlusNoise = 1,
  kVadInterfererPresent = 2,
};

// One integer per line; must match the tensor's frame count when used.
std::vector<int> load_vad_labels(const std::string& path);

// Sample average of y y^H over the frames labeled vad_class, one matrix per
// bin. Accumulation is pairwise over the frame list, so the result only
// depends on the set of selected frames in tensor order.
std::vector<CMatrix> estimate_cov(const StftTensor& tensor, std::span<const int> labels,
                                  int vad_class);

struct RtfEstimate {
  CVector rtf;             // reference entry exactly 1
  double eigenvalue = 0.0; // principal generalized eigenvalue of the pencil
  bool degenerate = false; // eigenvalue < 1 + 1e-3: no detectable source
};

// Covariance-whitening RTF: principal generalized eigenvector of
// (R_sig_plus_n, R_n), de-whitened through R_n and normalized at ref_index.
RtfEstimate cw_rtf(const CMatrix& R_sig_plus_n, const CMatrix& R_n, Index ref_index);

}  // namespace binaural

#endif
