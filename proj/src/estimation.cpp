#include "binaural/estimation.hpp"

#include <fstream>

#include "binaural/errors.hpp"
#include "binaural/linalg.hpp"

namespace binaural {

namespace {

// Pairwise sum of outer products y y^H for the given frames at one bin.
CMatrix pairwise_outer_sum(const StftTensor& tensor, const std::vector<int>& frames, int bin,
                           size_t lo, size_t hi) {
  if (hi - lo == 1) {
    const CVector y = tensor.snapshot(frames[lo], bin);
    return y * y.adjoint();
  }
  const size_t mid = lo + (hi - lo) / 2;
  return pairwise_outer_sum(tensor, frames, bin, lo, mid) +
         pairwise_outer_sum(tensor, frames, bin, mid, hi);
}

}  // namespace

std::vector<int> load_vad_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_vad_labels: cannot open " + path);
  std::vector<int> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    size_t pos = 0;
    int value = 0;
    try {
      value = std::stoi(line, &pos);
    } catch (const std::exception&) {
      throw ParseError("load_vad_labels: non-integer line '" + line + "'");
    }
    if (value < 0 || value > 2)
      throw ParseError("load_vad_labels: label outside {0,1,2}");
    labels.push_back(value);
  }
  return labels;
}

std::vector<CMatrix> estimate_cov(const StftTensor& tensor, std::span<const int> labels,
                                  int vad_class) {
  if (static_cast<int>(labels.size()) != tensor.num_frames())
    throw LengthMismatch("estimate_cov: one label per frame required");

  std::vector<int> selected;
  for (int t = 0; t < tensor.num_frames(); ++t)
    if (labels[static_cast<size_t>(t)] == vad_class) selected.push_back(t);

  const int m = tensor.num_channels();
  if (static_cast<int>(selected.size()) < m)
    throw InsufficientFrames("estimate_cov: fewer frames than channels in the selected class");

  const int bins = tensor.num_bins();
  std::vector<CMatrix> cov;
  cov.reserve(static_cast<size_t>(bins));
  const double inv_count = 1.0 / static_cast<double>(selected.size());
  for (int f = 0; f < bins; ++f)
    cov.push_back(inv_count * pairwise_outer_sum(tensor, selected, f, 0, selected.size()));
  return cov;
}

RtfEstimate cw_rtf(const CMatrix& R_sig_plus_n, const CMatrix& R_n, Index ref_index) {
  if (R_sig_plus_n.rows() != R_n.rows())
    throw DimensionMismatch("cw_rtf: covariance sizes differ");
  if (ref_index < 0 || ref_index >= R_n.rows())
    throw PreconditionError("cw_rtf: reference index out of range");

  const GevdResult gevd = gevd_principal(R_sig_plus_n, R_n);
  // De-whiten: for R_xn = p a a^H + R_n the eigenvector is prop. to
  // R_n^{-1} a, so R_n v recovers the ATF direction.
  CVector atf_dir = R_n * gevd.eigenvector;

  RtfEstimate out;
  out.eigenvalue = gevd.eigenvalue;
  out.degenerate = gevd.eigenvalue < 1.0 + 1e-3;
  const Complex ref = atf_dir(ref_index);
  if (std::abs(ref) <= 1e-14 * atf_dir.norm())
    throw ZeroReferenceEntry("cw_rtf: reference entry of the RTF estimate is zero");
  out.rtf = atf_dir / ref;
  out.rtf(ref_index) = Complex(1.0, 0.0);
  return out;
}

}  // namespace binaural
