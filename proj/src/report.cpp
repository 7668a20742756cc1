#include "binaural/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

#include "binaural/errors.hpp"

namespace binaural {

const char* to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::Bmvdr: return "bmvdr";
    case Algorithm::Blcmv: return "blcmv";
    case Algorithm::BmvdrN: return "bmvdr-n";
    case Algorithm::BlcmvN: return "blcmv-n";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "bmvdr") return Algorithm::Bmvdr;
  if (name == "blcmv") return Algorithm::Blcmv;
  if (name == "bmvdr-n" || name == "bmvdrn") return Algorithm::BmvdrN;
  if (name == "blcmv-n" || name == "blcmvn") return Algorithm::BlcmvN;
  throw PreconditionError("unknown algorithm '" + name + "'");
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

void MetricsReport::add(double freq_hz, std::string metric, std::string algorithm,
                        std::string side, double value) {
  rows.push_back({freq_hz, std::move(metric), std::move(algorithm), std::move(side), value});
}

void MetricsReport::write_csv(std::ostream& out) const {
  out << "freq_hz,metric,algorithm,side,value\n";
  for (const auto& r : rows)
    out << format_double(r.freq_hz) << ',' << r.metric << ',' << r.algorithm << ',' << r.side
        << ',' << format_double(r.value) << '\n';
}

void MetricsReport::write_json(std::ostream& out) const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row;
    row["freq_hz"] = r.freq_hz;
    row["metric"] = r.metric;
    row["algorithm"] = r.algorithm;
    row["side"] = r.side;
    if (std::isnan(r.value))
      row["value"] = nullptr;
    else if (std::isinf(r.value))
      row["value"] = r.value > 0 ? "inf" : "-inf";
    else
      row["value"] = r.value;
    j.push_back(std::move(row));
  }
  out << j.dump(2) << '\n';
}

}  // namespace binaural
