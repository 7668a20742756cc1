// report.hpp
// Flat metric report with CSV and JSON serialization. Broadband quantities
// use freq_hz = -1; everything else is the bin center frequency.

#ifndef BINAURAL_REPORT_HPP
#define BINAURAL_REPORT_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "binaural/types.hpp"

namespace binaural {

// Canonical %.12g float formatting shared by all writers so reruns are
// byte-identical; infinities print as inf/-inf, NaN as nan.
std::string format_double(double value);

struct MetricRow {
  double freq_hz = 0.0;  // -1 for broadband
  std::string metric;
  std::string algorithm;
  std::string side;  // "left", "right", or "" when sideless
  double value = 0.0;
};

struct MetricsReport {
  std::vector<MetricRow> rows;

  void add(double freq_hz, std::string metric, std::string algorithm, std::string side,
           double value);
  void write_csv(std::ostream& out) const;
  void write_json(std::ostream& out) const;
};

}  // namespace binaural

#endif
