// scene.hpp
// Acoustic scene construction: microphone/source geometry, synthetic and
// file-based ATF vectors, rank-1 source covariances, spatial coherence of
// isotropic noise fields, and broadband component mixing.

#ifndef BINAURAL_SCENE_HPP
#define BINAURAL_SCENE_HPP

#include <string>
#include <vector>

#include "binaural/types.hpp"

namespace binaural {

struct SourceSpec {
  enum class Role { Desired, Interferer };
  double angle_deg = 0.0;   // counterclockwise, 0 deg = front (+x), +y = left
  double distance_m = 1.0;  // from head center (origin)
  double psd = 1.0;         // source PSD p_x / p_u of the rank-1 model
  Role role = Role::Desired;
};

struct NoiseSpec {
  enum class Field { Cylindrical, Spherical };
  double p_white = 0.0;  // linear PSD of spatially white noise
  double p_iso = 0.0;    // linear PSD of the isotropic component
  Field field = Field::Cylindrical;
};

struct SceneSpec {
  std::vector<Eigen::Vector3d> mic_positions;  // left-device channels first
  int num_left = 0;                            // M_L
  int ref_left = 0;                            // 0-based, in [0, num_left)
  int ref_right = 0;                           // 0-based, in [num_left, M)
  std::vector<SourceSpec> sources;             // exactly one desired source
  NoiseSpec noise;
  int sample_rate_hz = 16000;
  int fft_len = 512;          // power of two
  int coherence_angles = 72;  // K plane-wave directions for the isotropic field
  bool head_shadow = false;   // first-order shadow filter on contralateral channels
  double head_radius_m = 0.0875;

  int num_channels() const { return static_cast<int>(mic_positions.size()); }
  int num_bins() const { return fft_len / 2 + 1; }
  double bin_hz(int bin) const {
    return static_cast<double>(bin) * sample_rate_hz / fft_len;
  }
  int desired_index() const;     // index into sources
  int interferer_index() const;  // -1 when absent
};

// Throws PreconditionError when an invariant is violated.
void validate_scene(const SceneSpec& spec);

SceneSpec scene_from_json_file(const std::string& path);
SceneSpec scene_from_json_text(const std::string& text);

// Free-field spherical-wave ATF of one source: M x F, deterministic.
CMatrix synth_atf(const SceneSpec& spec, int source_index);

// Desired/interferer ATF pair, M x F each.
struct AtfSet {
  CMatrix a;  // desired source
  CMatrix b;  // interfering source
};
AtfSet atf_set_from_scene(const SceneSpec& spec);

// Measured-ATF database: impulse responses per (angle, channel).
struct AtfDatabase {
  int sample_rate_hz = 0;
  int num_channels = 0;
  std::vector<double> angles_deg;
  RMatrix irs;  // (num_angles * num_channels) x ir_len, angle-major rows

  int num_angles() const { return static_cast<int>(angles_deg.size()); }
  int ir_len() const { return static_cast<int>(irs.cols()); }
  int nearest_angle(double angle_deg) const;
  // ATF of one database angle, M x F, via FFT of the impulse responses.
  CMatrix atf(int angle_index, int fft_len) const;
};

// Loads the JSON(+base64 or sidecar binary) database format described in the
// README. expected_channels < 0 skips the channel-count check.
AtfDatabase load_atf(const std::string& path, int expected_channels = -1);

// FFT transform of per-channel impulse responses (M x ir_len) to M x F.
CMatrix atf_from_impulse_responses(const RMatrix& irs, int fft_len);

// p * v v^H. Hermitian PSD with rank <= 1.
CMatrix rank1_cov(double p, const CVector& v);

// Spatial coherence of an isotropic field sampled by ATF columns h(theta_k),
// one vector per angle, all at the same frequency bin. Unit diagonal.
CMatrix iso_coherence_bin(const std::vector<CVector>& h);

// Per-bin coherence matrices from a stack of per-angle ATF matrices (M x F).
std::vector<CMatrix> iso_coherence(const std::vector<CMatrix>& atf_per_angle);

struct NoiseField {
  std::vector<CMatrix> gamma;  // coherence per bin, unit diagonal
  double p_white = 0.0;
  double p_iso = 0.0;
};

// Synthetic isotropic-field coherence for the scene's geometry (plane waves
// over K azimuth angles, or a Fibonacci sphere grid for the spherical field).
NoiseField make_noise_field(const SceneSpec& spec);

// R_n(bin) = p_white I + p_iso Gamma(bin).
CMatrix noise_cov_bin(const NoiseField& field, int bin);

// Scales interferer and noise so the broadband power ratios against the
// desired component at ref_channel hit the targets exactly.
struct MixResult {
  RMatrix x, u, n;  // scaled components (x is passed through)
  RMatrix y;        // x + u + n
  double scale_u = 1.0;
  double scale_n = 1.0;
};
MixResult mix_components(const RMatrix& x, const RMatrix& u, const RMatrix& n,
                         double target_snr_db, double target_sir_db, int ref_channel);

}  // namespace binaural

#endif
