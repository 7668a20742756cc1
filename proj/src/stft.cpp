#include "binaural/stft.hpp"

#include <cmath>
#include <numbers>

#include <fftw3.h>

#include "binaural/errors.hpp"

namespace binaural {

namespace {

constexpr double kPi = std::numbers::pi;

// Padded-sample fetch: frames index a timeline extended by hop zeros on both
// sides; anything outside the original signal reads as zero.
inline double padded_sample(const RMatrix& signal, int channel, Index padded_index, Index pad) {
  const Index s = padded_index - pad;
  if (s < 0 || s >= signal.cols()) return 0.0;
  return signal(channel, s);
}

}  // namespace

void validate_config(const StftConfig& cfg) {
  if (cfg.frame_len <= 0 || cfg.frame_len % 2 != 0)
    throw PreconditionError("stft: frame_len must be even and positive");
  if (cfg.hop != cfg.frame_len / 2)
    throw PreconditionError("stft: hop must equal frame_len / 2 (50% overlap)");
  if (cfg.sample_rate_hz <= 0) throw PreconditionError("stft: sample_rate_hz must be positive");
}

RVector sqrt_hann(int n) {
  RVector w(n);
  for (int i = 0; i < n; ++i)
    w(i) = std::sqrt(0.5 - 0.5 * std::cos(2.0 * kPi * i / n));
  return w;
}

StftTensor analyze(const RMatrix& signal, const StftConfig& cfg) {
  validate_config(cfg);
  const Index n = signal.cols();
  const int channels = static_cast<int>(signal.rows());
  if (channels < 1) throw PreconditionError("analyze: no channels");
  if (n < cfg.frame_len) throw TooShort("analyze: signal shorter than one frame");
  if (!signal.allFinite()) throw NonFiniteInput("analyze: signal has NaN/Inf samples");

  const Index pad = cfg.hop;
  const int num_frames = static_cast<int>((n + cfg.hop - 1) / cfg.hop) + 1;
  const int bins = cfg.num_bins();
  const RVector window = sqrt_hann(cfg.frame_len);

  StftTensor tensor;
  tensor.config = cfg;
  tensor.original_len = n;
  tensor.frames.assign(static_cast<size_t>(num_frames), CMatrix(bins, channels));

  std::vector<double> in(static_cast<size_t>(cfg.frame_len));
  std::vector<Complex> out(static_cast<size_t>(bins));
  fftw_plan plan = fftw_plan_dft_r2c_1d(cfg.frame_len, in.data(),
                                        reinterpret_cast<fftw_complex*>(out.data()),
                                        FFTW_ESTIMATE);

  for (int t = 0; t < num_frames; ++t) {
    const Index start = static_cast<Index>(t) * cfg.hop;
    for (int ch = 0; ch < channels; ++ch) {
      for (int i = 0; i < cfg.frame_len; ++i)
        in[static_cast<size_t>(i)] = window(i) * padded_sample(signal, ch, start + i, pad);
      fftw_execute(plan);
      for (int f = 0; f < bins; ++f) tensor.frames[static_cast<size_t>(t)](f, ch) = out[static_cast<size_t>(f)];
    }
  }
  fftw_destroy_plan(plan);
  return tensor;
}

RMatrix synthesize(const StftTensor& tensor, const StftConfig& cfg) {
  validate_config(cfg);
  if (tensor.config != cfg)
    throw ConfigMismatch("synthesize: tensor was produced with a different config");
  if (tensor.frames.empty()) throw PreconditionError("synthesize: empty tensor");
  const int channels = tensor.num_channels();
  const int bins = cfg.num_bins();
  for (const auto& frame : tensor.frames)
    if (frame.rows() != bins || frame.cols() != channels)
      throw DimensionMismatch("synthesize: inconsistent frame shapes");

  const Index pad = cfg.hop;
  const Index padded_len = static_cast<Index>(tensor.num_frames() - 1) * cfg.hop + cfg.frame_len;
  const RVector window = sqrt_hann(cfg.frame_len);

  RMatrix padded = RMatrix::Zero(channels, padded_len);
  std::vector<Complex> in(static_cast<size_t>(bins));
  std::vector<double> out(static_cast<size_t>(cfg.frame_len));
  fftw_plan plan = fftw_plan_dft_c2r_1d(cfg.frame_len, reinterpret_cast<fftw_complex*>(in.data()),
                                        out.data(), FFTW_ESTIMATE);

  for (int t = 0; t < tensor.num_frames(); ++t) {
    const Index start = static_cast<Index>(t) * cfg.hop;
    for (int ch = 0; ch < channels; ++ch) {
      for (int f = 0; f < bins; ++f) in[static_cast<size_t>(f)] = tensor.frames[static_cast<size_t>(t)](f, ch);
      fftw_execute(plan);
      for (int i = 0; i < cfg.frame_len; ++i)
        padded(ch, start + i) += window(i) * out[static_cast<size_t>(i)] / cfg.frame_len;
    }
  }
  fftw_destroy_plan(plan);
  return padded.middleCols(pad, tensor.original_len);
}

StftTensor apply_per_bin_filter(const StftTensor& tensor,
                                std::span<const BeamformerPair> filters) {
  const int bins = tensor.num_bins();
  const int channels = tensor.num_channels();
  if (static_cast<int>(filters.size()) != bins)
    throw DimensionMismatch("apply_per_bin_filter: need one filter pair per bin");
  for (const auto& pair : filters)
    if (pair.w_left.size() != channels || pair.w_right.size() != channels)
      throw DimensionMismatch("apply_per_bin_filter: filter length != channel count");

  StftTensor out;
  out.config = tensor.config;
  out.original_len = tensor.original_len;
  out.frames.assign(tensor.frames.size(), CMatrix(bins, 2));
  for (int t = 0; t < tensor.num_frames(); ++t) {
    const CMatrix& y = tensor.frames[static_cast<size_t>(t)];
    CMatrix& z = out.frames[static_cast<size_t>(t)];
    for (int f = 0; f < bins; ++f) {
      const CVector snapshot = y.row(f).transpose();
      z(f, 0) = filters[static_cast<size_t>(f)].w_left.dot(snapshot);   // w^H y
      z(f, 1) = filters[static_cast<size_t>(f)].w_right.dot(snapshot);
    }
  }
  return out;
}

}  // namespace binaural
