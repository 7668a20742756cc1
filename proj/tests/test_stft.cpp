#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "binaural/errors.hpp"
#include "binaural/stft.hpp"
#include "test_util.hpp"

using namespace binaural;
using namespace binaural::testutil;

namespace {

constexpr double kPi = std::numbers::pi;

StftConfig small_config() {
  StftConfig cfg;
  cfg.frame_len = 256;
  cfg.hop = 128;
  cfg.sample_rate_hz = 16000;
  return cfg;
}

RMatrix white_noise(Rng& rng, int channels, Index samples) {
  std::normal_distribution<double> dist(0.0, 1.0);
  RMatrix sig(channels, samples);
  for (int ch = 0; ch < channels; ++ch)
    for (Index s = 0; s < samples; ++s) sig(ch, s) = dist(rng);
  return sig;
}

}  // namespace

TEST_CASE("window pairs satisfy COLA at 50% overlap") {
  const int n = 64;
  const RVector w = sqrt_hann(n);
  for (int i = 0; i < n / 2; ++i)
    CHECK(w(i) * w(i) + w(i + n / 2) * w(i + n / 2) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("analyze of silence is an all-zero tensor") {
  const StftConfig cfg = small_config();
  const StftTensor t = analyze(RMatrix::Zero(2, 2048), cfg);
  for (const auto& frame : t.frames) CHECK(frame.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pure tone at a bin center concentrates its energy there") {
  const StftConfig cfg = small_config();
  const int bin = 24;
  const double freq = cfg.bin_hz(bin);
  RMatrix sig(1, 4096);
  for (Index s = 0; s < sig.cols(); ++s)
    sig(0, s) = std::sin(2.0 * kPi * freq * s / cfg.sample_rate_hz);
  const StftTensor t = analyze(sig, cfg);
  // Pick an interior frame, fully inside the signal.
  const CMatrix& frame = t.frames[t.num_frames() / 2];
  double total = 0.0;
  for (int f = 0; f < t.num_bins(); ++f) total += std::norm(frame(f, 0));
  const double peak = std::norm(frame(bin - 1, 0)) + std::norm(frame(bin, 0)) +
                      std::norm(frame(bin + 1, 0));
  CHECK(peak / total >= 0.99);
}

TEST_CASE("impulse at a frame center gives a flat spectrum at the window peak") {
  const StftConfig cfg = small_config();
  RMatrix sig = RMatrix::Zero(1, 2048);
  // Frame t starts at t*hop - hop in signal coordinates; its center falls on
  // sample t*hop, so an impulse there is weighted by the window midpoint.
  const int t_probe = 6;
  sig(0, static_cast<Index>(t_probe) * cfg.hop) = 1.0;
  const StftTensor t = analyze(sig, cfg);
  const RVector w = sqrt_hann(cfg.frame_len);
  const double want = w(cfg.frame_len / 2);
  for (int f = 0; f < t.num_bins(); ++f)
    CHECK(std::abs(t.frames[t_probe](f, 0)) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("round trip reproduces white noise to 1e-10") {
  Rng rng(31);
  const StftConfig cfg = small_config();
  const RMatrix sig = white_noise(rng, 2, 5000);
  const RMatrix back = synthesize(analyze(sig, cfg), cfg);
  REQUIRE(back.cols() == sig.cols());
  const double err = (back - sig).cwiseAbs().maxCoeff() / sig.cwiseAbs().maxCoeff();
  CHECK(err < 1e-10);
}

TEST_CASE("round trip reproduces an AR(1) signal to 1e-10") {
  Rng rng(32);
  std::normal_distribution<double> dist(0.0, 1.0);
  const StftConfig cfg = small_config();
  RMatrix sig(1, 8000);
  double state = 0.0;
  for (Index s = 0; s < sig.cols(); ++s) {
    state = 0.95 * state + dist(rng);
    sig(0, s) = state;
  }
  const RMatrix back = synthesize(analyze(sig, cfg), cfg);
  CHECK((back - sig).cwiseAbs().maxCoeff() / sig.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("all-zero tensor synthesizes to silence") {
  const StftConfig cfg = small_config();
  StftTensor t = analyze(RMatrix::Zero(1, 1000), cfg);
  const RMatrix out = synthesize(t, cfg);
  CHECK(out.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("per-frame Parseval identity") {
  Rng rng(33);
  const StftConfig cfg = small_config();
  const RMatrix sig = white_noise(rng, 1, 3000);
  const StftTensor t = analyze(sig, cfg);
  const RVector w = sqrt_hann(cfg.frame_len);

  const int t_probe = 8;
  // Windowed-frame energy straight from the signal (frame starts at
  // t*hop - hop in signal coordinates).
  double time_energy = 0.0;
  const Index start = static_cast<Index>(t_probe) * cfg.hop - cfg.hop;
  for (int i = 0; i < cfg.frame_len; ++i) {
    const Index s = start + i;
    const double x = (s >= 0 && s < sig.cols()) ? sig(0, s) : 0.0;
    time_energy += w(i) * x * w(i) * x;
  }
  double spec_energy = std::norm(t.frames[t_probe](0, 0)) +
                       std::norm(t.frames[t_probe](t.num_bins() - 1, 0));
  for (int f = 1; f < t.num_bins() - 1; ++f)
    spec_energy += 2.0 * std::norm(t.frames[t_probe](f, 0));
  spec_energy /= cfg.frame_len;
  CHECK(spec_energy == doctest::Approx(time_energy).epsilon(1e-9));
}

TEST_CASE("apply_per_bin_filter selection, linearity, oracle") {
  Rng rng(34);
  const StftConfig cfg = small_config();
  const int channels = 3;
  const RMatrix sig = white_noise(rng, channels, 2000);
  const StftTensor t = analyze(sig, cfg);

  std::vector<BeamformerPair> selection(static_cast<size_t>(t.num_bins()));
  for (auto& pair : selection) {
    pair.w_left = CVector::Zero(channels);
    pair.w_right = CVector::Zero(channels);
    pair.w_left(0) = 1.0;
    pair.w_right(2) = 1.0;
  }
  const StftTensor sel = apply_per_bin_filter(t, selection);
  for (int tf = 0; tf < t.num_frames(); ++tf)
    for (int f = 0; f < t.num_bins(); ++f) {
      CHECK(sel.frames[tf](f, 0) == t.frames[tf](f, 0));
      CHECK(sel.frames[tf](f, 1) == t.frames[tf](f, 2));
    }

  std::vector<BeamformerPair> filters(static_cast<size_t>(t.num_bins()));
  for (auto& pair : filters) {
    pair.w_left = random_vector(rng, channels);
    pair.w_right = random_vector(rng, channels);
  }
  const StftTensor out = apply_per_bin_filter(t, filters);

  // Doubled filters double the output.
  std::vector<BeamformerPair> doubled = filters;
  for (auto& pair : doubled) {
    pair.w_left *= 2.0;
    pair.w_right *= 2.0;
  }
  const StftTensor out2 = apply_per_bin_filter(t, doubled);
  for (int tf = 0; tf < t.num_frames(); ++tf)
    CHECK((out2.frames[tf] - 2.0 * out.frames[tf]).cwiseAbs().maxCoeff() < 1e-12);

  // Naive per-bin dot-product oracle.
  for (int tf = 0; tf < t.num_frames(); tf += 7)
    for (int f = 0; f < t.num_bins(); f += 13) {
      Complex want(0.0, 0.0);
      for (int ch = 0; ch < channels; ++ch)
        want += std::conj(filters[static_cast<size_t>(f)].w_left(ch)) * t.frames[tf](f, ch);
      CHECK(std::abs(out.frames[tf](f, 0) - want) < 1e-12);
    }
}

TEST_CASE("filtering distributes over component sums") {
  Rng rng(35);
  const StftConfig cfg = small_config();
  const RMatrix x = white_noise(rng, 2, 1500);
  const RMatrix u = white_noise(rng, 2, 1500);
  const RMatrix n = white_noise(rng, 2, 1500);
  const StftTensor xt = analyze(x, cfg), ut = analyze(u, cfg), nt = analyze(n, cfg),
                   yt = analyze(x + u + n, cfg);
  std::vector<BeamformerPair> filters(static_cast<size_t>(yt.num_bins()));
  for (auto& pair : filters) {
    pair.w_left = random_vector(rng, 2);
    pair.w_right = random_vector(rng, 2);
  }
  const StftTensor zy = apply_per_bin_filter(yt, filters);
  const StftTensor zx = apply_per_bin_filter(xt, filters);
  const StftTensor zu = apply_per_bin_filter(ut, filters);
  const StftTensor zn = apply_per_bin_filter(nt, filters);
  double scale = 0.0, err = 0.0;
  for (int tf = 0; tf < zy.num_frames(); ++tf) {
    scale = std::max(scale, zy.frames[tf].cwiseAbs().maxCoeff());
    err = std::max(err, (zy.frames[tf] - zx.frames[tf] - zu.frames[tf] - zn.frames[tf])
                            .cwiseAbs()
                            .maxCoeff());
  }
  CHECK(err < 1e-12 * scale);
}

TEST_CASE("stft error paths") {
  const StftConfig cfg = small_config();
  CHECK_THROWS_AS(analyze(RMatrix::Zero(1, 100), cfg), TooShort);

  StftConfig bad = cfg;
  bad.hop = 100;
  CHECK_THROWS_AS(analyze(RMatrix::Zero(1, 1000), bad), PreconditionError);

  const StftTensor t = analyze(RMatrix::Zero(1, 1000), cfg);
  StftConfig other = cfg;
  other.frame_len = 512;
  other.hop = 256;
  CHECK_THROWS_AS(synthesize(t, other), ConfigMismatch);

  std::vector<BeamformerPair> wrong(static_cast<size_t>(t.num_bins()));
  for (auto& pair : wrong) {
    pair.w_left = CVector::Zero(5);
    pair.w_right = CVector::Zero(5);
  }
  CHECK_THROWS_AS(apply_per_bin_filter(t, wrong), DimensionMismatch);
}
