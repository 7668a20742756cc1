#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

#include "binaural/errors.hpp"
#include "binaural/metrics.hpp"
#include "binaural/parallel.hpp"
#include "binaural/workflows.hpp"

namespace binaural {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Combo {
  double delta = 0.0;
  double eta = 0.0;
  Algorithm algo = Algorithm::Bmvdr;
};

struct ComboValues {
  double dsnr_closed[2] = {kNan, kNan};
  double dsnr_filter[2] = {kNan, kNan};
  double dsir_closed[2] = {kNan, kNan};
  double dsir_filter[2] = {kNan, kNan};
  double msc_closed = kNan;
  double msc_filter = kNan;
  bool valid = false;
};

struct BinEval {
  double freq_hz = 0.0;
  double msc_in = kNan;
  double delta_opt_l = kNan;
  std::vector<ComboValues> combos;
};

// Model of the scene evaluated per bin: ATF pair, noise covariance, refs.
struct Model {
  CMatrix a, b;  // M x F
  std::vector<CMatrix> R_n;
  Index ref_left = 0, ref_right = 0;
  double p_x = 1.0, p_u = 1.0;
  std::vector<double> freq_hz;
  int num_bins() const { return static_cast<int>(freq_hz.size()); }
};

Model build_model(const ValidateJob& job) {
  Model model;
  if (job.scene) {
    const SceneSpec& spec = *job.scene;
    validate_scene(spec);
    const AtfSet atf = atf_set_from_scene(spec);
    const NoiseField field = make_noise_field(spec);
    model.a = atf.a;
    model.b = atf.b;
    model.ref_left = spec.ref_left;
    model.ref_right = spec.ref_right;
    model.p_x = spec.sources[static_cast<size_t>(spec.desired_index())].psd;
    model.p_u = spec.sources[static_cast<size_t>(spec.interferer_index())].psd;
    for (int f = 0; f < spec.num_bins(); ++f) {
      model.R_n.push_back(noise_cov_bin(field, f));
      model.freq_hz.push_back(spec.bin_hz(f));
    }
  } else if (!job.atf_path.empty()) {
    const AtfDatabase db = load_atf(job.atf_path);
    if (job.num_left < 1 || job.num_left >= db.num_channels ||
        job.ref_left < 0 || job.ref_left >= job.num_left ||
        job.ref_right < job.num_left || job.ref_right >= db.num_channels)
      throw PreconditionError("validate: reference indices inconsistent with the database");
    model.a = db.atf(db.nearest_angle(job.desired_angle_deg), job.fft_len);
    model.b = db.atf(db.nearest_angle(job.interferer_angle_deg), job.fft_len);
    model.ref_left = job.ref_left;
    model.ref_right = job.ref_right;

    std::vector<CMatrix> per_angle;
    per_angle.reserve(static_cast<size_t>(db.num_angles()));
    for (int k = 0; k < db.num_angles(); ++k) per_angle.push_back(db.atf(k, job.fft_len));
    const auto gamma = iso_coherence(per_angle);
    const int bins = job.fft_len / 2 + 1;
    for (int f = 0; f < bins; ++f) {
      CMatrix r = job.p_iso * gamma[static_cast<size_t>(f)];
      r.diagonal().array() += Complex(job.p_white, 0.0);
      model.R_n.push_back(std::move(r));
      model.freq_hz.push_back(static_cast<double>(f) * db.sample_rate_hz / job.fft_len);
    }
  } else {
    throw PreconditionError("validate: either a scene or an ATF database is required");
  }
  return model;
}

bool feasible(const Combo& c) {
  return !(c.algo == Algorithm::BlcmvN && c.eta == 1.0 && c.delta != 1.0);
}

// Closed-form and filter-based values must coincide; inf only matches inf
// (or an astronomically large dB value on the other route).
void require_agreement(double closed, double filter, const char* what) {
  if (std::isnan(closed) || std::isnan(filter)) return;
  const bool ci = std::isinf(closed), fi = std::isinf(filter);
  if (ci || fi) {
    if (ci && fi && std::signbit(closed) == std::signbit(filter)) return;
    const double finite = ci ? filter : closed;
    if (std::abs(finite) >= 300.0) return;
    throw Error(std::string("validate: closed-form and filter-based ") + what + " disagree");
  }
  const double tol = 1e-6 * std::max({1.0, std::abs(closed), std::abs(filter)});
  if (std::abs(closed - filter) > tol)
    throw Error(std::string("validate: closed-form and filter-based ") + what + " disagree");
}

ComboValues eval_combo(const BeamformerInputs& in, double p_x, double p_u, const Combo& c) {
  ComboValues v;
  const Side sides[2] = {Side::Left, Side::Right};
  try {
    const BeamformerPair pair = compute_pair(in, c.algo, c.delta, c.eta);
    for (int s = 0; s < 2; ++s) {
      const Index ref = in.ref(sides[s]);
      const Complex a_ref = in.a_ref(sides[s]);
      const Complex b_ref = in.b_ref(sides[s]);
      const CVector& w = s == 0 ? pair.w_left : pair.w_right;

      const double snr_in = p_x * std::norm(a_ref) / std::real(in.R_n(ref, ref));
      const double sir_in = p_x * std::norm(a_ref) / (p_u * std::norm(b_ref));

      const double p_x_out = p_x * std::norm(w.dot(in.a));
      const double p_n_out = psd(in.R_n, w);
      v.dsnr_filter[s] = improvement_db(snr(p_x_out, p_n_out), snr_in);
      v.dsnr_closed[s] =
          ratio_db(predicted_out_snr(c.algo, in, p_x, sides[s], c.delta, c.eta)) -
          ratio_db(snr_in);
      require_agreement(v.dsnr_closed[s], v.dsnr_filter[s], "SNR improvement");

      const bool blcmv_family = c.algo == Algorithm::Blcmv || c.algo == Algorithm::BlcmvN;
      const double p_u_out = p_u * std::norm(w.dot(in.b));
      if (blcmv_family && c.delta == 0.0) {
        v.dsir_filter[s] = kInf;  // exact null by construction
        v.dsir_closed[s] = kInf;
      } else {
        v.dsir_filter[s] =
            p_u_out > 0.0 ? improvement_db(p_x_out / p_u_out, sir_in) : kInf;
        v.dsir_closed[s] =
            ratio_db(predicted_out_sir(c.algo, in, p_x, p_u, sides[s], c.delta, c.eta)) -
            ratio_db(sir_in);
      }
      require_agreement(v.dsir_closed[s], v.dsir_filter[s], "SIR improvement");
    }

    v.msc_filter = ic_msc(in.R_n, pair.w_left, pair.w_right).msc;
    switch (c.algo) {
      case Algorithm::Bmvdr:
        v.msc_closed = 1.0;
        break;
      case Algorithm::BmvdrN:
        v.msc_closed = predicted_msc_bmvdr_n(in, c.eta);
        break;
      case Algorithm::Blcmv:
        v.msc_closed = std::min(std::norm(predicted_ic_blcmv_n(in, c.delta, 0.0)), 1.0);
        break;
      case Algorithm::BlcmvN:
        v.msc_closed = std::min(std::norm(predicted_ic_blcmv_n(in, c.delta, c.eta)), 1.0);
        break;
    }
    require_agreement(v.msc_closed, v.msc_filter, "noise MSC");
    v.valid = true;
  } catch (const DegeneracyError&) {
    v = ComboValues{};  // leave NaNs; bin is degenerate for this combo
  }
  return v;
}

}  // namespace

void run_validate(const ValidateJob& job, std::ostream& out) {
  if (job.delta_grid.empty() || job.eta_grid.empty())
    throw PreconditionError("validate: parameter grids must be non-empty");
  for (double d : job.delta_grid)
    if (!(d >= -1.0 && d <= 1.5))
      throw PreconditionError("validate: delta outside the [-1, 1.5] guardrail");
  for (double e : job.eta_grid)
    if (!(e >= 0.0 && e <= 1.0)) throw PreconditionError("validate: eta outside [0, 1]");
  if (job.algorithms.empty()) throw PreconditionError("validate: no algorithms selected");

  const Model model = build_model(job);
  const int bins = model.num_bins();

  // Canonical combo order: delta asc, eta asc, algorithm name asc.
  std::vector<double> deltas = job.delta_grid, etas = job.eta_grid;
  std::sort(deltas.begin(), deltas.end());
  deltas.erase(std::unique(deltas.begin(), deltas.end()), deltas.end());
  std::sort(etas.begin(), etas.end());
  etas.erase(std::unique(etas.begin(), etas.end()), etas.end());
  std::vector<Algorithm> algos = job.algorithms;
  std::sort(algos.begin(), algos.end(), [](Algorithm x, Algorithm y) {
    return std::string(to_string(x)) < to_string(y);
  });
  algos.erase(std::unique(algos.begin(), algos.end()), algos.end());

  std::vector<Combo> combos;
  for (double d : deltas)
    for (double e : etas)
      for (Algorithm a : algos) combos.push_back({d, e, a});

  std::vector<BinEval> evals(static_cast<size_t>(bins));
  parallel_for(bins, job.workers, [&](int f) {
    BinEval& ev = evals[static_cast<size_t>(f)];
    ev.freq_hz = model.freq_hz[static_cast<size_t>(f)];

    BeamformerInputs in;
    in.R_n = model.R_n[static_cast<size_t>(f)];
    in.a = model.a.col(f);
    in.b = model.b.col(f);
    in.ref_left = model.ref_left;
    in.ref_right = model.ref_right;

    const double p_ll = std::real(in.R_n(in.ref_left, in.ref_left));
    const double p_rr = std::real(in.R_n(in.ref_right, in.ref_right));
    ev.msc_in = std::min(std::norm(in.R_n(in.ref_left, in.ref_right)) / (p_ll * p_rr), 1.0);
    try {
      ev.delta_opt_l = delta_opt(in, Side::Left);
    } catch (const Error&) {
      ev.delta_opt_l = kNan;
    }

    ev.combos.resize(combos.size());
    for (size_t c = 0; c < combos.size(); ++c) {
      if (!feasible(combos[c])) continue;
      ev.combos[c] = eval_combo(in, model.p_x, model.p_u, combos[c]);
    }
  });

  // Frequency-averaged MSC error per combo, bins 1..F-1, degenerate bins skipped.
  std::vector<double> dmsc(combos.size(), kNan);
  for (size_t c = 0; c < combos.size(); ++c) {
    double acc = 0.0;
    int count = 0;
    for (int f = 1; f < bins; ++f) {
      const ComboValues& v = evals[static_cast<size_t>(f)].combos[c];
      if (!v.valid) continue;
      acc += std::abs(evals[static_cast<size_t>(f)].msc_in - v.msc_filter);
      ++count;
    }
    if (count > 0) dmsc[c] = acc / count;
  }

  // Requested bins: nearest bin per frequency, deduplicated, ascending.
  std::vector<int> selected;
  if (job.freqs_hz.empty()) {
    for (int f = 0; f < bins; ++f) selected.push_back(f);
  } else {
    std::set<int> uniq;
    for (double target : job.freqs_hz) {
      int best = 0;
      for (int f = 1; f < bins; ++f)
        if (std::abs(model.freq_hz[static_cast<size_t>(f)] - target) <
            std::abs(model.freq_hz[static_cast<size_t>(best)] - target))
          best = f;
      uniq.insert(best);
    }
    selected.assign(uniq.begin(), uniq.end());
  }

  out << "freq_hz,delta,eta,algorithm,"
         "dsnr_l_closed_db,dsnr_l_filter_db,dsnr_r_closed_db,dsnr_r_filter_db,"
         "dsir_l_closed_db,dsir_l_filter_db,dsir_r_closed_db,dsir_r_filter_db,"
         "msc_out_closed,msc_out_filter,msc_in,dmsc,delta_opt_l\n";
  for (int f : selected) {
    const BinEval& ev = evals[static_cast<size_t>(f)];
    for (size_t c = 0; c < combos.size(); ++c) {
      if (!feasible(combos[c])) continue;
      const ComboValues& v = ev.combos[c];
      out << format_double(ev.freq_hz) << ',' << format_double(combos[c].delta) << ','
          << format_double(combos[c].eta) << ',' << to_string(combos[c].algo) << ','
          << format_double(v.dsnr_closed[0]) << ',' << format_double(v.dsnr_filter[0]) << ','
          << format_double(v.dsnr_closed[1]) << ',' << format_double(v.dsnr_filter[1]) << ','
          << format_double(v.dsir_closed[0]) << ',' << format_double(v.dsir_filter[0]) << ','
          << format_double(v.dsir_closed[1]) << ',' << format_double(v.dsir_filter[1]) << ','
          << format_double(v.msc_closed) << ',' << format_double(v.msc_filter) << ','
          << format_double(ev.msc_in) << ',' << format_double(dmsc[c]) << ','
          << format_double(ev.delta_opt_l) << '\n';
    }
  }
}

}  // namespace binaural
