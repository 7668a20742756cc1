// workflows.hpp
// The two batch entry points: "validate" evaluates the closed-form metric
// expressions against explicit filters on a model scene (matrices only), and
// "process" runs the recorded-signal pipeline (STFT, VAD-segmented covariance
// estimation, covariance-whitening RTFs, filtering, overlap-add synthesis).

#ifndef BINAURAL_WORKFLOWS_HPP
#define BINAURAL_WORKFLOWS_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "binaural/report.hpp"
#include "binaural/scene.hpp"
#include "binaural/stft.hpp"
#include "binaural/types.hpp"
#include "binaural/wav.hpp"

namespace binaural {

struct ValidateJob {
  // Scene mode: synthetic geometry. ATF mode: measured database file.
  std::optional<SceneSpec> scene;
  std::string atf_path;
  // ATF-mode parameters (scene mode takes them from the SceneSpec).
  double desired_angle_deg = 0.0;
  double interferer_angle_deg = -35.0;
  double p_white = 3.1622776601683794e-06;  // -55 dB
  double p_iso = 1.0;
  int fft_len = 512;
  int num_left = 2;
  int ref_left = 0;
  int ref_right = 2;

  std::vector<double> freqs_hz;  // empty = all bins
  std::vector<double> delta_grid;
  std::vector<double> eta_grid;
  std::vector<Algorithm> algorithms;
  int workers = 1;
};

// Writes the CSV described in the README; byte-identical across runs and
// worker counts. Combinations that are infeasible for an algorithm
// (eta = 1 with delta != 1 for blcmv-n) are skipped.
void run_validate(const ValidateJob& job, std::ostream& out);

struct ProcessJob {
  // Either a premixed recording or the three ground-truth components.
  std::string mix_wav;
  std::string x_wav, u_wav, n_wav;
  std::string vad_path;  // unused when oracle_covariances is set

  StftConfig stft{};  // sample_rate_hz is taken from the input files

  double delta = 0.3;
  double eta = 0.3;
  bool mix_to_targets = true;  // component mode only
  double snr_db = 10.0;
  double sir_db = 5.0;

  int num_left = 0;    // 0: split channels evenly
  int ref_left = 0;
  int ref_right = -1;  // -1: first right-device channel

  std::vector<Algorithm> algorithms;
  std::string out_dir;
  WavFormat out_format = WavFormat::Float32;
  bool oracle_covariances = false;
  bool write_components = true;  // also write shadow-filtered x/u/n outputs
  int workers = 1;
};

struct ProcessResult {
  MetricsReport report;
  // Bins whose RTF estimation was degenerate or failed; filters there fall
  // back to reference-microphone pass-through.
  std::vector<int> flagged_bins;
  int num_frames = 0;
  int num_bins = 0;
};

ProcessResult run_process(const ProcessJob& job);

}  // namespace binaural

#endif
