// bbf — binaural beamforming batch tool.
//
//   bbf validate --scene scene.json --delta 0.1,0.3,1.0 --eta 0,0.3 --out sweep.csv
//   bbf process  --components x.wav,u.wav,n.wav --vad labels.txt --out-dir out/
//
// Exit codes: 0 success, 2 precondition violation, 3 numerical degeneracy.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "binaural/errors.hpp"
#include "binaural/workflows.hpp"

namespace {

using namespace binaural;

std::vector<double> parse_double_list(const std::string& text, const char* what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw PreconditionError(std::string("invalid ") + what + " value '" + item + "'");
    }
  }
  return values;
}

std::vector<Algorithm> parse_algorithms(const std::string& text) {
  std::vector<Algorithm> algos;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "all")
      return {Algorithm::Bmvdr, Algorithm::Blcmv, Algorithm::BmvdrN, Algorithm::BlcmvN};
    algos.push_back(algorithm_from_string(item));
  }
  return algos;
}

void warn_parameter_range(const std::vector<double>& deltas, const std::vector<double>& etas) {
  for (double d : deltas)
    if (!(d > 0.0 && d <= 1.0))
      std::cerr << "warning: delta = " << d << " is outside the nominal (0, 1] range\n";
  for (double e : etas)
    if (!(e >= 0.0 && e <= 1.0))
      std::cerr << "warning: eta = " << e << " is outside the nominal [0, 1] range\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"binaural beamforming toolkit"};
  app.require_subcommand(1);
  app.set_config("--config")->description("key=value file mirroring the flags");

  int workers = 1;
  app.add_option("--workers", workers, "worker thread count")
      ->envname("BINAURAL_WORKERS")
      ->check(CLI::PositiveNumber);

  // ---- validate ----
  auto* validate = app.add_subcommand("validate", "evaluate the analytic metric sweep");
  std::string scene_path, atf_path, delta_list = "0.3", eta_list = "0.3";
  std::string freq_list = "all", algo_list = "all", out_csv;
  ValidateJob vjob;
  validate->add_option("--scene", scene_path, "scene JSON file");
  validate->add_option("--atf", atf_path, "measured ATF database JSON file");
  validate->add_option("--delta", delta_list, "comma list of interference scaling values");
  validate->add_option("--eta", eta_list, "comma list of mixing values");
  validate->add_option("--freqs", freq_list, "comma list of frequencies in Hz, or 'all'");
  validate->add_option("--algos", algo_list, "comma list: bmvdr,blcmv,bmvdr-n,blcmv-n or 'all'");
  validate->add_option("--out", out_csv, "output CSV path (default stdout)");
  validate->add_option("--desired-angle", vjob.desired_angle_deg, "ATF mode: desired angle [deg]");
  validate->add_option("--interferer-angle", vjob.interferer_angle_deg,
                       "ATF mode: interferer angle [deg]");
  validate->add_option("--p-white", vjob.p_white, "ATF mode: white noise PSD (linear)");
  validate->add_option("--p-iso", vjob.p_iso, "ATF mode: isotropic noise PSD (linear)");
  validate->add_option("--fft-len", vjob.fft_len, "ATF mode: FFT length");
  validate->add_option("--num-left", vjob.num_left, "ATF mode: left-device channel count");
  validate->add_option("--ref-left", vjob.ref_left, "ATF mode: left reference channel");
  validate->add_option("--ref-right", vjob.ref_right, "ATF mode: right reference channel");

  // ---- process ----
  auto* process = app.add_subcommand("process", "run the STFT pipeline on recordings");
  std::string in_wav, components, vad_path, out_dir, palgo_list = "all";
  ProcessJob pjob;
  bool no_mix = false;
  process->add_option("--in", in_wav, "premixed multichannel WAV");
  process->add_option("--components", components, "x.wav,u.wav,n.wav (u optional: x.wav,,n.wav)");
  process->add_option("--vad", vad_path, "VAD label file, one of {0,1,2} per frame");
  process->add_option("--delta", pjob.delta, "interference scaling parameter");
  process->add_option("--eta", pjob.eta, "mixing parameter");
  process->add_option("--snr", pjob.snr_db, "input SNR target in dB at the right reference");
  process->add_option("--sir", pjob.sir_db, "input SIR target in dB at the right reference");
  process->add_flag("--no-mix", no_mix, "use the component files as-is, no level adjustment");
  process->add_option("--frame-len", pjob.stft.frame_len, "STFT frame length (samples)");
  process->add_option("--num-left", pjob.num_left, "left-device channel count (0: half)");
  process->add_option("--ref-left", pjob.ref_left, "left reference channel");
  process->add_option("--ref-right", pjob.ref_right, "right reference channel (-1: first right)");
  process->add_option("--algos", palgo_list, "comma list of algorithms or 'all'");
  process->add_option("--out-dir", out_dir, "output directory")->required();
  process->add_flag("--oracle-cov", pjob.oracle_covariances,
                    "exact covariances from the component signals instead of VAD estimates");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      if (!scene_path.empty()) vjob.scene = scene_from_json_file(scene_path);
      vjob.atf_path = atf_path;
      vjob.delta_grid = parse_double_list(delta_list, "delta");
      vjob.eta_grid = parse_double_list(eta_list, "eta");
      if (freq_list != "all") vjob.freqs_hz = parse_double_list(freq_list, "freq");
      vjob.algorithms = parse_algorithms(algo_list);
      vjob.workers = workers;
      warn_parameter_range(vjob.delta_grid, vjob.eta_grid);

      if (out_csv.empty()) {
        run_validate(vjob, std::cout);
      } else {
        std::ofstream out(out_csv);
        if (!out) throw PreconditionError("cannot open " + out_csv + " for writing");
        run_validate(vjob, out);
        std::cerr << "wrote " << out_csv << "\n";
      }
    } else if (process->parsed()) {
      pjob.mix_wav = in_wav;
      if (!components.empty()) {
        std::stringstream ss(components);
        std::string item;
        std::vector<std::string> parts;
        while (std::getline(ss, item, ',')) parts.push_back(item);
        if (parts.size() != 3)
          throw PreconditionError("--components expects x.wav,u.wav,n.wav");
        pjob.x_wav = parts[0];
        pjob.u_wav = parts[1];
        pjob.n_wav = parts[2];
      }
      pjob.vad_path = vad_path;
      pjob.mix_to_targets = !no_mix;
      pjob.algorithms = parse_algorithms(palgo_list);
      pjob.out_dir = out_dir;
      pjob.workers = workers;
      warn_parameter_range({pjob.delta}, {pjob.eta});

      const ProcessResult result = run_process(pjob);
      std::cerr << "processed " << result.num_frames << " frames x " << result.num_bins
                << " bins; " << result.flagged_bins.size() << " flagged bins; reports in "
                << out_dir << "\n";
    }
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DegeneracyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
