#include "binaural/scene.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "binaural/errors.hpp"
#include "binaural/fft.hpp"
#include "binaural/linalg.hpp"

namespace binaural {

namespace {

using nlohmann::json;

constexpr double kPi = std::numbers::pi;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// First-order spherical head-shadow filter (one pole, one zero). theta_inc is
// the angle between the ray to the microphone and the ray to the source, both
// from the head center.
Complex head_shadow_gain(double freq_hz, double theta_inc_rad, double head_radius_m) {
  const double omega = 2.0 * kPi * freq_hz;
  const double omega0 = kSpeedOfSound / head_radius_m;
  const double alpha_min = 0.1;
  const double theta_min = 150.0 * kPi / 180.0;
  const double alpha =
      (1.0 + alpha_min / 2.0) + (1.0 - alpha_min / 2.0) * std::cos(theta_inc_rad * kPi / theta_min);
  const Complex jw(0.0, omega / (2.0 * omega0));
  return (1.0 + alpha * jw) / (1.0 + jw);
}

Eigen::Vector3d direction_from_azimuth(double angle_deg) {
  const double rad = angle_deg * kPi / 180.0;
  return {std::cos(rad), std::sin(rad), 0.0};
}

// ATF of a single plane wave from unit direction d: phase advance d . p / c.
CVector plane_wave_atf(const SceneSpec& spec, const Eigen::Vector3d& d, double freq_hz) {
  const int m = spec.num_channels();
  CVector h(m);
  for (int i = 0; i < m; ++i) {
    const double tau = -d.dot(spec.mic_positions[i]) / kSpeedOfSound;
    Complex g = std::polar(1.0, -2.0 * kPi * freq_hz * tau);
    if (spec.head_shadow) {
      const Eigen::Vector3d& p = spec.mic_positions[i];
      if (p.norm() > 1e-6) {
        const double cosang = p.normalized().dot(d);
        g *= head_shadow_gain(freq_hz, std::acos(std::clamp(cosang, -1.0, 1.0)),
                              spec.head_radius_m);
      }
    }
    h(i) = g;
  }
  return h;
}

std::vector<Eigen::Vector3d> field_directions(const SceneSpec& spec) {
  const int k = spec.coherence_angles;
  std::vector<Eigen::Vector3d> dirs;
  dirs.reserve(static_cast<size_t>(k));
  if (spec.noise.field == NoiseSpec::Field::Cylindrical) {
    for (int i = 0; i < k; ++i) dirs.push_back(direction_from_azimuth(360.0 * i / k));
  } else {
    // Fibonacci sphere grid.
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < k; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / k;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * i;
      dirs.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
    }
  }
  return dirs;
}

constexpr char kB64Chars[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::vector<unsigned char> base64_decode(const std::string& text) {
  int lut[256];
  std::fill(std::begin(lut), std::end(lut), -1);
  for (int i = 0; i < 64; ++i) lut[static_cast<unsigned char>(kB64Chars[i])] = i;

  std::vector<unsigned char> out;
  out.reserve(text.size() * 3 / 4);
  int acc = 0, bits = 0;
  for (char c : text) {
    if (c == '=' || c == '\n' || c == '\r' || c == ' ') continue;
    const int v = lut[static_cast<unsigned char>(c)];
    if (v < 0) throw ParseError("base64: invalid character in data");
    acc = (acc << 6) | v;
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>((acc >> bits) & 0xff));
    }
  }
  return out;
}

json parse_json(const std::string& text, const char* who) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError(std::string(who) + ": malformed JSON");
  return j;
}

double ref_power(const RMatrix& sig, int ref_channel) {
  return sig.row(ref_channel).squaredNorm() / static_cast<double>(sig.cols());
}

}  // namespace

int SceneSpec::desired_index() const {
  for (size_t i = 0; i < sources.size(); ++i)
    if (sources[i].role == SourceSpec::Role::Desired) return static_cast<int>(i);
  return -1;
}

int SceneSpec::interferer_index() const {
  for (size_t i = 0; i < sources.size(); ++i)
    if (sources[i].role == SourceSpec::Role::Interferer) return static_cast<int>(i);
  return -1;
}

void validate_scene(const SceneSpec& spec) {
  const int m = spec.num_channels();
  if (m < 2) throw PreconditionError("scene: need at least 2 channels");
  if (spec.num_left < 1 || spec.num_left >= m)
    throw PreconditionError("scene: num_left must split channels into two non-empty devices");
  if (spec.ref_left < 0 || spec.ref_left >= spec.num_left)
    throw PreconditionError("scene: ref_left outside the left device");
  if (spec.ref_right < spec.num_left || spec.ref_right >= m)
    throw PreconditionError("scene: ref_right outside the right device");
  int desired = 0;
  for (const auto& s : spec.sources) {
    if (s.role == SourceSpec::Role::Desired) ++desired;
    if (s.distance_m <= 0.0) throw InvalidGeometry("scene: source distance must be positive");
  }
  if (desired != 1) throw PreconditionError("scene: exactly one desired source required");
  if (!is_power_of_two(spec.fft_len)) throw PreconditionError("scene: fft_len must be a power of two");
  if (spec.sample_rate_hz <= 0) throw PreconditionError("scene: sample_rate_hz must be positive");
  if (spec.noise.p_white < 0.0 || spec.noise.p_iso < 0.0)
    throw PreconditionError("scene: noise PSDs must be nonnegative");
  if (spec.coherence_angles < 1) throw PreconditionError("scene: coherence_angles must be >= 1");
}

SceneSpec scene_from_json_text(const std::string& text) {
  const json j = parse_json(text, "scene");
  SceneSpec spec;
  try {
    spec.sample_rate_hz = j.value("sample_rate_hz", 16000);
    spec.fft_len = j.value("fft_len", 512);
    spec.num_left = j.at("num_left").get<int>();
    spec.ref_left = j.value("ref_left", 0);
    spec.ref_right = j.value("ref_right", spec.num_left);
    for (const auto& p : j.at("mic_positions")) {
      if (!p.is_array() || p.size() != 3) throw ParseError("scene: mic position must be [x,y,z]");
      spec.mic_positions.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
    }
    for (const auto& s : j.at("sources")) {
      SourceSpec src;
      src.angle_deg = s.at("angle_deg").get<double>();
      src.distance_m = s.value("distance_m", 1.0);
      src.psd = s.value("psd", 1.0);
      const std::string role = s.at("role").get<std::string>();
      if (role == "desired")
        src.role = SourceSpec::Role::Desired;
      else if (role == "interferer")
        src.role = SourceSpec::Role::Interferer;
      else
        throw ParseError("scene: source role must be desired or interferer");
      spec.sources.push_back(src);
    }
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      spec.noise.p_white = n.value("p_white", 0.0);
      spec.noise.p_iso = n.value("p_iso", 0.0);
      const std::string field = n.value("field", std::string("cylindrical"));
      if (field == "cylindrical")
        spec.noise.field = NoiseSpec::Field::Cylindrical;
      else if (field == "spherical")
        spec.noise.field = NoiseSpec::Field::Spherical;
      else
        throw ParseError("scene: noise field must be cylindrical or spherical");
    }
    spec.coherence_angles = j.value("coherence_angles", 72);
    spec.head_shadow = j.value("head_shadow", false);
    spec.head_radius_m = j.value("head_radius_m", 0.0875);
  } catch (const json::exception& e) {
    throw ParseError(std::string("scene: ") + e.what());
  }
  validate_scene(spec);
  return spec;
}

SceneSpec scene_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("scene: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return scene_from_json_text(buf.str());
}

CMatrix synth_atf(const SceneSpec& spec, int source_index) {
  validate_scene(spec);
  if (source_index < 0 || source_index >= static_cast<int>(spec.sources.size()))
    throw PreconditionError("synth_atf: source index out of range");
  const SourceSpec& src = spec.sources[static_cast<size_t>(source_index)];
  const Eigen::Vector3d pos = src.distance_m * direction_from_azimuth(src.angle_deg);

  const int m = spec.num_channels();
  const int bins = spec.num_bins();
  CMatrix atf(m, bins);
  for (int i = 0; i < m; ++i) {
    const Eigen::Vector3d& mic = spec.mic_positions[i];
    const double r = (pos - mic).norm();
    if (r < 1e-9) throw InvalidGeometry("synth_atf: source coincides with a microphone");
    double theta_inc = 0.0;
    const bool shadow = spec.head_shadow && mic.norm() > 1e-6;
    if (shadow) {
      const double cosang = mic.normalized().dot((pos - Eigen::Vector3d::Zero()).normalized());
      theta_inc = std::acos(std::clamp(cosang, -1.0, 1.0));
    }
    for (int f = 0; f < bins; ++f) {
      const double freq = spec.bin_hz(f);
      Complex g = std::polar(1.0 / r, -2.0 * kPi * freq * r / kSpeedOfSound);
      if (shadow) g *= head_shadow_gain(freq, theta_inc, spec.head_radius_m);
      atf(i, f) = g;
    }
  }
  return atf;
}

AtfSet atf_set_from_scene(const SceneSpec& spec) {
  validate_scene(spec);
  const int di = spec.desired_index();
  const int ii = spec.interferer_index();
  if (ii < 0) throw PreconditionError("scene: interferer source required for an ATF pair");
  return {synth_atf(spec, di), synth_atf(spec, ii)};
}

int AtfDatabase::nearest_angle(double angle_deg) const {
  if (angles_deg.empty()) throw EmptyDatabase("atf database has no angles");
  auto wrap = [](double d) {
    d = std::fmod(d, 360.0);
    if (d > 180.0) d -= 360.0;
    if (d < -180.0) d += 360.0;
    return std::abs(d);
  };
  int best = 0;
  double best_dist = wrap(angles_deg[0] - angle_deg);
  for (int k = 1; k < num_angles(); ++k) {
    const double dist = wrap(angles_deg[static_cast<size_t>(k)] - angle_deg);
    if (dist < best_dist) {
      best_dist = dist;
      best = k;
    }
  }
  return best;
}

CMatrix atf_from_impulse_responses(const RMatrix& irs, int fft_len) {
  if (!is_power_of_two(fft_len))
    throw PreconditionError("atf_from_impulse_responses: fft_len must be a power of two");
  const int m = static_cast<int>(irs.rows());
  if (m < 1) throw PreconditionError("atf_from_impulse_responses: no channels");
  const int bins = fft_len / 2 + 1;
  CMatrix atf(m, bins);
  for (int i = 0; i < m; ++i) {
    const auto spec = rfft(irs.row(i).transpose(), fft_len);
    for (int f = 0; f < bins; ++f) atf(i, f) = spec[static_cast<size_t>(f)];
  }
  return atf;
}

CMatrix AtfDatabase::atf(int angle_index, int fft_len) const {
  if (angle_index < 0 || angle_index >= num_angles())
    throw PreconditionError("atf: angle index out of range");
  return atf_from_impulse_responses(
      irs.middleRows(static_cast<Index>(angle_index) * num_channels, num_channels), fft_len);
}

AtfDatabase load_atf(const std::string& path, int expected_channels) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_atf: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const json j = parse_json(buf.str(), "load_atf");

  AtfDatabase db;
  int num_angles = 0, ir_len = 0;
  try {
    db.sample_rate_hz = j.at("sample_rate_hz").get<int>();
    db.num_channels = j.at("num_channels").get<int>();
    num_angles = j.at("num_angles").get<int>();
    ir_len = j.at("ir_len").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("load_atf: ") + e.what());
  }
  if (db.num_channels < 1 || num_angles < 1 || ir_len < 1)
    throw ParseError("load_atf: header fields must be positive");
  if (expected_channels >= 0 && db.num_channels != expected_channels)
    throw ChannelMismatch("load_atf: database channel count does not match the scene");

  if (j.contains("angles_deg")) {
    db.angles_deg = j.at("angles_deg").get<std::vector<double>>();
    if (static_cast<int>(db.angles_deg.size()) != num_angles)
      throw ParseError("load_atf: angles_deg length does not match num_angles");
  } else {
    for (int k = 0; k < num_angles; ++k) db.angles_deg.push_back(360.0 * k / num_angles);
  }

  std::vector<unsigned char> raw;
  if (j.contains("data_b64")) {
    raw = base64_decode(j.at("data_b64").get<std::string>());
  } else if (j.contains("data_file")) {
    std::string rel = j.at("data_file").get<std::string>();
    std::string dir;
    if (const auto slash = path.find_last_of('/'); slash != std::string::npos)
      dir = path.substr(0, slash + 1);
    std::ifstream bin(dir + rel, std::ios::binary);
    if (!bin) throw ParseError("load_atf: cannot open sidecar " + rel);
    raw.assign(std::istreambuf_iterator<char>(bin), std::istreambuf_iterator<char>());
  } else {
    throw ParseError("load_atf: neither data_b64 nor data_file present");
  }

  const size_t want = static_cast<size_t>(num_angles) * db.num_channels * ir_len * sizeof(double);
  if (raw.size() != want) throw ParseError("load_atf: impulse-response payload truncated");

  db.irs.resize(static_cast<Index>(num_angles) * db.num_channels, ir_len);
  const double* values = reinterpret_cast<const double*>(raw.data());
  for (Index r = 0; r < db.irs.rows(); ++r)
    for (Index c = 0; c < db.irs.cols(); ++c)
      db.irs(r, c) = values[static_cast<size_t>(r) * ir_len + static_cast<size_t>(c)];
  if (!db.irs.allFinite()) throw ParseError("load_atf: non-finite impulse response samples");
  return db;
}

CMatrix rank1_cov(double p, const CVector& v) {
  if (p < 0.0) throw PreconditionError("rank1_cov: negative PSD");
  if (!v.allFinite()) throw NonFiniteInput("rank1_cov: vector has NaN/Inf entries");
  return p * (v * v.adjoint());
}

CMatrix iso_coherence_bin(const std::vector<CVector>& h) {
  if (h.empty()) throw EmptyDatabase("iso_coherence: no angles");
  const Index m = h.front().size();
  for (const auto& col : h)
    if (col.size() != m) throw DimensionMismatch("iso_coherence: inconsistent channel counts");

  CMatrix cross = CMatrix::Zero(m, m);
  for (const auto& col : h) cross += col * col.adjoint();

  RVector energy = cross.diagonal().real();
  for (Index i = 0; i < m; ++i)
    if (!(energy(i) > 0.0)) throw ZeroAtf("iso_coherence: channel with zero energy across angles");

  CMatrix gamma(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      gamma(i, j) = cross(i, j) / std::sqrt(energy(i) * energy(j));
  gamma.diagonal().setOnes();
  if (!check_psd(gamma, 1e-9))
    throw DegeneracyError("iso_coherence: coherence matrix failed the PSD check");
  return gamma;
}

std::vector<CMatrix> iso_coherence(const std::vector<CMatrix>& atf_per_angle) {
  if (atf_per_angle.empty()) throw EmptyDatabase("iso_coherence: no angles");
  const Index bins = atf_per_angle.front().cols();
  std::vector<CMatrix> gamma;
  gamma.reserve(static_cast<size_t>(bins));
  std::vector<CVector> h(atf_per_angle.size());
  for (Index f = 0; f < bins; ++f) {
    for (size_t k = 0; k < atf_per_angle.size(); ++k) h[k] = atf_per_angle[k].col(f);
    gamma.push_back(iso_coherence_bin(h));
  }
  return gamma;
}

NoiseField make_noise_field(const SceneSpec& spec) {
  validate_scene(spec);
  const auto dirs = field_directions(spec);
  const int bins = spec.num_bins();

  NoiseField field;
  field.p_white = spec.noise.p_white;
  field.p_iso = spec.noise.p_iso;
  field.gamma.reserve(static_cast<size_t>(bins));
  std::vector<CVector> h(dirs.size());
  for (int f = 0; f < bins; ++f) {
    const double freq = spec.bin_hz(f);
    for (size_t k = 0; k < dirs.size(); ++k) h[k] = plane_wave_atf(spec, dirs[k], freq);
    field.gamma.push_back(iso_coherence_bin(h));
  }
  return field;
}

CMatrix noise_cov_bin(const NoiseField& field, int bin) {
  if (bin < 0 || bin >= static_cast<int>(field.gamma.size()))
    throw PreconditionError("noise_cov_bin: bin out of range");
  const CMatrix& gamma = field.gamma[static_cast<size_t>(bin)];
  CMatrix r = field.p_iso * gamma;
  r.diagonal().array() += Complex(field.p_white, 0.0);
  return r;
}

MixResult mix_components(const RMatrix& x, const RMatrix& u, const RMatrix& n,
                         double target_snr_db, double target_sir_db, int ref_channel) {
  if (x.rows() != u.rows() || x.rows() != n.rows() || x.cols() != u.cols() ||
      x.cols() != n.cols())
    throw DimensionMismatch("mix_components: component shapes differ");
  if (ref_channel < 0 || ref_channel >= x.rows())
    throw PreconditionError("mix_components: reference channel out of range");

  const double p_x = ref_power(x, ref_channel);
  const double p_u = ref_power(u, ref_channel);
  const double p_n = ref_power(n, ref_channel);
  if (!(p_x > 0.0) || !(p_u > 0.0) || !(p_n > 0.0))
    throw SilentComponent("mix_components: a component is silent at the reference channel");

  MixResult out;
  out.scale_u = std::sqrt(p_x / (p_u * std::pow(10.0, target_sir_db / 10.0)));
  out.scale_n = std::sqrt(p_x / (p_n * std::pow(10.0, target_snr_db / 10.0)));
  out.x = x;
  out.u = out.scale_u * u;
  out.n = out.scale_n * n;
  out.y = out.x + out.u + out.n;
  return out;
}

}  // namespace binaural
