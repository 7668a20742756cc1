#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "binaural/errors.hpp"
#include "binaural/estimation.hpp"
#include "binaural/metrics.hpp"
#include "binaural/parallel.hpp"
#include "binaural/workflows.hpp"

namespace binaural {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

StftTensor add_tensors(const StftTensor& a, const StftTensor& b) {
  StftTensor out = a;
  for (size_t t = 0; t < out.frames.size(); ++t) out.frames[t] += b.frames[t];
  return out;
}

// Sample covariance over all frames, per bin.
std::vector<CMatrix> cov_all_frames(const StftTensor& tensor) {
  std::vector<int> labels(static_cast<size_t>(tensor.num_frames()), 0);
  return estimate_cov(tensor, labels, 0);
}

double broadband_power(const RMatrix& sig, Index channel) {
  return sig.row(channel).squaredNorm() / static_cast<double>(sig.cols());
}

// Time-averaged per-bin power of one channel.
double bin_power(const StftTensor& tensor, int bin, int channel) {
  double acc = 0.0;
  for (const auto& frame : tensor.frames) acc += std::norm(frame(bin, channel));
  return acc / static_cast<double>(tensor.num_frames());
}

// Sample interaural coherence between two channels of a tensor at one bin.
Complex sample_ic(const StftTensor& tensor, int bin, int ch_l, int ch_r) {
  Complex cross(0.0, 0.0);
  double p_l = 0.0, p_r = 0.0;
  for (const auto& frame : tensor.frames) {
    const Complex l = frame(bin, ch_l), r = frame(bin, ch_r);
    cross += l * std::conj(r);
    p_l += std::norm(l);
    p_r += std::norm(r);
  }
  if (!(p_l > 0.0) || !(p_r > 0.0)) return {0.0, 0.0};
  return cross / std::sqrt(p_l * p_r);
}

BeamformerPair passthrough_pair(int channels, Index ref_left, Index ref_right, Algorithm algo,
                                double delta, double eta) {
  BeamformerPair pair;
  pair.w_left = CVector::Zero(channels);
  pair.w_right = CVector::Zero(channels);
  pair.w_left(ref_left) = 1.0;
  pair.w_right(ref_right) = 1.0;
  pair.algorithm = algo;
  pair.delta = delta;
  pair.eta = eta;
  return pair;
}

}  // namespace

ProcessResult run_process(const ProcessJob& job) {
  const bool component_mode = !job.x_wav.empty();
  if (!component_mode && job.mix_wav.empty())
    throw PreconditionError("process: provide either --in or component wavs");
  if (!component_mode && job.oracle_covariances)
    throw PreconditionError("process: oracle covariances require component inputs");
  if (job.algorithms.empty()) throw PreconditionError("process: no algorithms selected");
  if (job.out_dir.empty()) throw PreconditionError("process: output directory required");

  bool need_u = false;
  for (Algorithm a : job.algorithms)
    if (a == Algorithm::Blcmv || a == Algorithm::BlcmvN) need_u = true;

  // Load signals.
  RMatrix x, u, n, y;
  int sample_rate = 0;
  bool have_u = false;
  if (component_mode) {
    const WavData wx = wav_read(job.x_wav);
    const WavData wn = wav_read(job.n_wav);
    sample_rate = wx.sample_rate_hz;
    if (wn.sample_rate_hz != sample_rate)
      throw ConfigMismatch("process: component sample rates differ");
    if (wn.samples.rows() != wx.samples.rows() || wn.samples.cols() != wx.samples.cols())
      throw ChannelMismatch("process: component shapes differ");
    x = wx.samples;
    n = wn.samples;
    if (!job.u_wav.empty()) {
      const WavData wu = wav_read(job.u_wav);
      if (wu.sample_rate_hz != sample_rate)
        throw ConfigMismatch("process: component sample rates differ");
      if (wu.samples.rows() != x.rows() || wu.samples.cols() != x.cols())
        throw ChannelMismatch("process: component shapes differ");
      u = wu.samples;
      have_u = true;
    } else {
      u = RMatrix::Zero(x.rows(), x.cols());
    }
  } else {
    const WavData wy = wav_read(job.mix_wav);
    y = wy.samples;
    sample_rate = wy.sample_rate_hz;
  }
  if (need_u && component_mode && !have_u)
    throw PreconditionError("process: interferer component required for blcmv/blcmv-n");

  const int channels = static_cast<int>(component_mode ? x.rows() : y.rows());
  const int num_left = job.num_left > 0 ? job.num_left : channels / 2;
  const Index ref_left = job.ref_left;
  const Index ref_right = job.ref_right >= 0 ? job.ref_right : num_left;
  if (channels < 2 || num_left < 1 || num_left >= channels || ref_left < 0 ||
      ref_left >= num_left || ref_right < num_left || ref_right >= channels)
    throw PreconditionError("process: inconsistent channel split or reference indices");

  // Mix components to the requested broadband SNR/SIR at the right reference.
  if (component_mode && job.mix_to_targets) {
    if (have_u) {
      MixResult mix = mix_components(x, u, n, job.snr_db, job.sir_db, static_cast<int>(ref_right));
      x = std::move(mix.x);
      u = std::move(mix.u);
      n = std::move(mix.n);
    } else {
      const double p_x = broadband_power(x, ref_right);
      const double p_n = broadband_power(n, ref_right);
      if (!(p_x > 0.0) || !(p_n > 0.0))
        throw SilentComponent("process: silent component at the reference channel");
      n *= std::sqrt(p_x / (p_n * std::pow(10.0, job.snr_db / 10.0)));
    }
  }
  if (component_mode) y = x + u + n;

  StftConfig cfg = job.stft;
  cfg.sample_rate_hz = sample_rate;
  validate_config(cfg);

  const StftTensor yt = analyze(y, cfg);
  const int bins = yt.num_bins();

  // Covariance estimates per bin.
  std::vector<CMatrix> R_n, R_xn, R_v;
  StftTensor xt, ut, nt;
  if (component_mode) {
    xt = analyze(x, cfg);
    nt = analyze(n, cfg);
    if (have_u) ut = analyze(u, cfg);
  }
  if (job.oracle_covariances) {
    R_n = cov_all_frames(nt);
    R_xn = cov_all_frames(add_tensors(xt, nt));
    if (need_u) R_v = cov_all_frames(add_tensors(ut, nt));
  } else {
    if (job.vad_path.empty()) throw PreconditionError("process: VAD label file required");
    const std::vector<int> labels = load_vad_labels(job.vad_path);
    R_n = estimate_cov(yt, labels, kVadNoiseOnly);
    R_xn = estimate_cov(yt, labels, kVadDesiredPlusNoise);
    if (need_u) R_v = estimate_cov(yt, labels, kVadInterfererPresent);
  }

  // RTF estimation and per-bin filters.
  struct BinState {
    CVector rtf_x, rtf_u;
    bool flagged_x = false, flagged_u = false;
  };
  std::vector<BinState> states(static_cast<size_t>(bins));
  std::vector<std::vector<BeamformerPair>> filters(
      job.algorithms.size(), std::vector<BeamformerPair>(static_cast<size_t>(bins)));

  parallel_for(bins, job.workers, [&](int f) {
    BinState& st = states[static_cast<size_t>(f)];
    try {
      const RtfEstimate est = cw_rtf(R_xn[static_cast<size_t>(f)], R_n[static_cast<size_t>(f)],
                                     ref_left);
      st.rtf_x = est.rtf;
      st.flagged_x = est.degenerate;
    } catch (const Error&) {
      st.flagged_x = true;
    }
    if (need_u) {
      try {
        const RtfEstimate est = cw_rtf(R_v[static_cast<size_t>(f)], R_n[static_cast<size_t>(f)],
                                       ref_left);
        st.rtf_u = est.rtf;
        st.flagged_u = est.degenerate;
      } catch (const Error&) {
        st.flagged_u = true;
      }
    }

    BeamformerInputs in;
    in.R_n = R_n[static_cast<size_t>(f)];
    in.a = st.flagged_x ? CVector() : st.rtf_x;
    in.b = (need_u && !st.flagged_u) ? st.rtf_u : CVector();
    in.ref_left = ref_left;
    in.ref_right = ref_right;

    for (size_t k = 0; k < job.algorithms.size(); ++k) {
      const Algorithm algo = job.algorithms[k];
      const bool uses_u = algo == Algorithm::Blcmv || algo == Algorithm::BlcmvN;
      const bool refuse = st.flagged_x || (uses_u && st.flagged_u);
      if (refuse) {
        filters[k][static_cast<size_t>(f)] =
            passthrough_pair(channels, ref_left, ref_right, algo, job.delta, job.eta);
        continue;
      }
      try {
        filters[k][static_cast<size_t>(f)] = compute_pair(in, algo, job.delta, job.eta);
      } catch (const DegeneracyError&) {
        st.flagged_u = uses_u;  // collinear RTFs behave like a missing source
        filters[k][static_cast<size_t>(f)] =
            passthrough_pair(channels, ref_left, ref_right, algo, job.delta, job.eta);
      }
    }
  });

  ProcessResult result;
  result.num_frames = yt.num_frames();
  result.num_bins = bins;
  for (int f = 0; f < bins; ++f) {
    const BinState& st = states[static_cast<size_t>(f)];
    if (st.flagged_x || (need_u && st.flagged_u)) result.flagged_bins.push_back(f);
  }

  std::filesystem::create_directories(job.out_dir);
  const auto out_path = [&](const std::string& name) { return job.out_dir + "/" + name; };

  // Input noise coherence curve (signal-based when components are available,
  // otherwise from the estimated covariance).
  std::vector<double> msc_in_curve(static_cast<size_t>(bins));
  for (int f = 0; f < bins; ++f) {
    if (component_mode) {
      msc_in_curve[static_cast<size_t>(f)] = std::min(
          std::norm(sample_ic(nt, f, static_cast<int>(ref_left), static_cast<int>(ref_right))),
          1.0);
    } else {
      const CMatrix& r = R_n[static_cast<size_t>(f)];
      const double den =
          std::real(r(ref_left, ref_left)) * std::real(r(ref_right, ref_right));
      msc_in_curve[static_cast<size_t>(f)] =
          den > 0.0 ? std::min(std::norm(r(ref_left, ref_right)) / den, 1.0) : kNan;
    }
  }

  MetricsReport& report = result.report;
  for (int f : result.flagged_bins)
    report.add(cfg.bin_hz(f), "flagged_bin", "", "", 1.0);

  // Per algorithm: filter, synthesize, write, measure.
  for (size_t k = 0; k < job.algorithms.size(); ++k) {
    const Algorithm algo = job.algorithms[k];
    const std::string name = to_string(algo);

    const StftTensor zt = apply_per_bin_filter(yt, filters[k]);
    const RMatrix z = synthesize(zt, cfg);
    wav_write(out_path(name + ".wav"), z, sample_rate, job.out_format);

    // ITF-derived cues from the estimated steering vectors.
    std::vector<Complex> itf_x(static_cast<size_t>(bins), Complex(kNan, kNan));
    std::vector<Complex> itf_u(static_cast<size_t>(bins), Complex(kNan, kNan));
    for (int f = 0; f < bins; ++f) {
      const BinState& st = states[static_cast<size_t>(f)];
      const BeamformerPair& pair = filters[k][static_cast<size_t>(f)];
      if (!st.flagged_x && st.rtf_x.size() == channels) {
        try {
          itf_x[static_cast<size_t>(f)] = itf_from_filters(pair.w_left, pair.w_right, st.rtf_x);
        } catch (const Error&) {
        }
      }
      if (need_u && !st.flagged_u && st.rtf_u.size() == channels) {
        try {
          itf_u[static_cast<size_t>(f)] = itf_from_filters(pair.w_left, pair.w_right, st.rtf_u);
        } catch (const Error&) {
        }
      }
    }
    const std::vector<double> itd_x = itd_curve(itf_x, sample_rate, cfg.frame_len);
    const std::vector<double> itd_u = itd_curve(itf_u, sample_rate, cfg.frame_len);

    // Model-based output noise MSC through the estimated R_n.
    std::vector<double> msc_out_curve(static_cast<size_t>(bins), kNan);
    for (int f = 0; f < bins; ++f) {
      const BeamformerPair& pair = filters[k][static_cast<size_t>(f)];
      try {
        msc_out_curve[static_cast<size_t>(f)] =
            ic_msc(R_n[static_cast<size_t>(f)], pair.w_left, pair.w_right).msc;
      } catch (const Error&) {
      }
    }

    StftTensor xzt, uzt, nzt;
    RMatrix xz, uz, nz;
    if (component_mode) {
      xzt = apply_per_bin_filter(xt, filters[k]);
      nzt = apply_per_bin_filter(nt, filters[k]);
      xz = synthesize(xzt, cfg);
      nz = synthesize(nzt, cfg);
      if (have_u) {
        uzt = apply_per_bin_filter(ut, filters[k]);
        uz = synthesize(uzt, cfg);
      }
      if (job.write_components) {
        wav_write(out_path(name + "_x.wav"), xz, sample_rate, job.out_format);
        wav_write(out_path(name + "_n.wav"), nz, sample_rate, job.out_format);
        if (have_u) wav_write(out_path(name + "_u.wav"), uz, sample_rate, job.out_format);
      }
      // Signal-based MSC of the shadow-filtered noise.
      for (int f = 0; f < bins; ++f)
        msc_out_curve[static_cast<size_t>(f)] = std::min(std::norm(sample_ic(nzt, f, 0, 1)), 1.0);
    }

    for (int f = 0; f < bins; ++f) {
      const double freq = cfg.bin_hz(f);
      report.add(freq, "msc_in", name, "", msc_in_curve[static_cast<size_t>(f)]);
      report.add(freq, "msc_out", name, "", msc_out_curve[static_cast<size_t>(f)]);
      report.add(freq, "ild_x", name, "", ild(itf_x[static_cast<size_t>(f)]));
      report.add(freq, "itd_x", name, "", itd_x[static_cast<size_t>(f)]);
      if (need_u) {
        report.add(freq, "ild_u", name, "", ild(itf_u[static_cast<size_t>(f)]));
        report.add(freq, "itd_u", name, "", itd_u[static_cast<size_t>(f)]);
      }
    }
    report.add(-1.0, "delta_msc", name, "", msc_error(msc_in_curve, msc_out_curve));

    if (component_mode) {
      const Index sides[2] = {ref_left, ref_right};
      const char* side_names[2] = {"left", "right"};
      for (int s = 0; s < 2; ++s) {
        const double px_in = broadband_power(x, sides[s]);
        const double pn_in = broadband_power(n, sides[s]);
        const double px_out = broadband_power(xz, s);
        const double pn_out = broadband_power(nz, s);
        report.add(-1.0, "delta_snr_db", name, side_names[s],
                   improvement_db(snr(px_out, pn_out), snr(px_in, pn_in)));
        if (have_u) {
          const double pu_in = broadband_power(u, sides[s]);
          const double pu_out = broadband_power(uz, s);
          report.add(-1.0, "delta_sir_db", name, side_names[s],
                     improvement_db(snr(px_out, pu_out), snr(px_in, pu_in)));
        }
        // Per-bin improvements from the component tensors.
        for (int f = 0; f < bins; ++f) {
          const double freq = cfg.bin_hz(f);
          const double bx_in = bin_power(xt, f, static_cast<int>(sides[s]));
          const double bn_in = bin_power(nt, f, static_cast<int>(sides[s]));
          const double bx_out = bin_power(xzt, f, s);
          const double bn_out = bin_power(nzt, f, s);
          const bool ok_snr = bx_in > 0.0 && bn_in > 0.0 && bn_out > 0.0;
          report.add(freq, "delta_snr_db", name, side_names[s],
                     ok_snr ? improvement_db(bx_out / bn_out, bx_in / bn_in) : kNan);
          if (have_u) {
            const double bu_in = bin_power(ut, f, static_cast<int>(sides[s]));
            const double bu_out = bin_power(uzt, f, s);
            const bool ok_sir = bx_in > 0.0 && bu_in > 0.0 && bu_out > 0.0;
            report.add(freq, "delta_sir_db", name, side_names[s],
                       ok_sir ? improvement_db(bx_out / bu_out, bx_in / bu_in) : kNan);
          }
        }
      }
    }
  }

  {
    std::ofstream csv(out_path("report.csv"));
    report.write_csv(csv);
    std::ofstream jsonf(out_path("report.json"));
    report.write_json(jsonf);
  }
  return result;
}

}  // namespace binaural
