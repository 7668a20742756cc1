// stft.hpp
// Analysis/synthesis filterbank: square-root Hann windows on both sides,
// 50% overlap, overlap-add reconstruction. Signals are zero-padded by half a
// frame at both ends before framing and trimmed after synthesis, so the
// round trip reproduces every original sample.

#ifndef BINAURAL_STFT_HPP
#define BINAURAL_STFT_HPP

#include <span>
#include <vector>

#include "binaural/beamformers.hpp"
#include "binaural/types.hpp"

namespace binaural {

struct StftConfig {
  int frame_len = 8192;
  int hop = 4096;  // must equal frame_len / 2
  int sample_rate_hz = 16000;

  int num_bins() const { return frame_len / 2 + 1; }
  double bin_hz(int bin) const {
    return static_cast<double>(bin) * sample_rate_hz / frame_len;
  }
  friend bool operator==(const StftConfig&, const StftConfig&) = default;
};

void validate_config(const StftConfig& cfg);

// Periodic sqrt-Hann; w^2[i] + w^2[i + n/2] == 1.
RVector sqrt_hann(int n);

struct StftTensor {
  StftConfig config;
  Index original_len = 0;        // samples before padding
  std::vector<CMatrix> frames;   // per frame: bins x channels

  int num_frames() const { return static_cast<int>(frames.size()); }
  int num_bins() const { return config.num_bins(); }
  int num_channels() const {
    return frames.empty() ? 0 : static_cast<int>(frames.front().cols());
  }
  // Microphone snapshot y(t, f) across channels.
  CVector snapshot(int frame, int bin) const {
    return frames[static_cast<size_t>(frame)].row(bin).transpose();
  }
};

// signal: channels x samples, length >= frame_len.
StftTensor analyze(const RMatrix& signal, const StftConfig& cfg);

// Inverse with overlap-add; cfg must match the one used by analyze.
RMatrix synthesize(const StftTensor& tensor, const StftConfig& cfg);

// z_L(t,f) = w_L(f)^H y(t,f), z_R likewise; output has two channels (L, R).
StftTensor apply_per_bin_filter(const StftTensor& tensor,
                                std::span<const BeamformerPair> filters);

}  // namespace binaural

#endif
