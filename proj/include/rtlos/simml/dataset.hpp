#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rtlos/error.hpp"
#include "rtlos/simml/features.hpp"
#include "rtlos/sim/rng.hpp"

namespace rtlos::simml {

inline constexpr double kNoValue = std::numeric_limits<double>::quiet_NaN();

// Bookkeeping carried next to each sample; never fed to a model.
struct SampleMeta {
  int replication = 0;
  std::uint64_t patient_id = 0;
  int facility = 0;
  int flow_case = 0;
  double arrival = 0.0;
  std::array<double, 4> sojourn{kNoValue, kNoValue, kNoValue, kNoValue};  // ncd, doctor, lab, pharmacy
  std::array<double, 4> aqt_station{kNoValue, kNoValue, kNoValue, kNoValue};
  double aqt_total = kNoValue;  // AQT total with the realized lab weight
};

struct Sample {
  FeatureVector features{};
  double label = 0.0;  // realized LOS, minutes
  SampleMeta meta;
};

using Dataset = std::vector<Sample>;

namespace detail {

inline void put(std::ostream& out, double v) {
  if (std::isnan(v)) return;
  out << v;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline double parse_cell(const std::string& cell) {
  if (cell.empty()) return kNoValue;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size()) throw ConfigError("malformed dataset value '" + cell + "'");
  return v;
}

inline constexpr std::array<const char*, 14> kMetaNames{
    "meta_replication", "meta_patient_id",  "meta_facility",    "meta_case",        "meta_arrival",
    "meta_sojourn_ncd", "meta_sojourn_doc", "meta_sojourn_lab", "meta_sojourn_phar", "meta_aqt_ncd",
    "meta_aqt_doc",     "meta_aqt_lab",     "meta_aqt_phar",    "meta_aqt_total"};

}  // namespace detail

inline void write_csv_header(std::ostream& out) {
  out << "# schema " << kSchemaVersion << '\n';
  for (auto name : kFeatureNames) out << name << ',';
  out << "label_los_min";
  for (auto name : detail::kMetaNames) out << ',' << name;
  out << '\n';
}

inline void write_csv_row(std::ostream& out, const Sample& s) {
  const auto precision = out.precision(17);
  for (double v : s.features) out << v << ',';
  out << s.label << ',' << s.meta.replication << ',' << s.meta.patient_id << ',' << s.meta.facility << ','
      << s.meta.flow_case << ',' << s.meta.arrival;
  for (double v : s.meta.sojourn) {
    out << ',';
    detail::put(out, v);
  }
  for (double v : s.meta.aqt_station) {
    out << ',';
    detail::put(out, v);
  }
  out << ',';
  detail::put(out, s.meta.aqt_total);
  out << '\n';
  out.precision(precision);
}

inline void write_csv(std::ostream& out, const Dataset& data) {
  write_csv_header(out);
  for (const auto& s : data) write_csv_row(out, s);
}

inline Dataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "# schema " + std::string(kSchemaVersion))
    throw ConfigError("dataset does not start with '# schema " + std::string(kSchemaVersion) + "'");
  if (!std::getline(in, line)) throw ConfigError("dataset has no header row");
  const auto header = detail::split_csv(line);
  const std::size_t columns = kFeatureCount + 1 + detail::kMetaNames.size();
  if (header.size() != columns) throw ConfigError("dataset header has " + std::to_string(header.size()) + " columns");
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    if (header[i] != kFeatureNames[i]) throw ConfigError("unexpected feature column '" + header[i] + "'");

  Dataset data;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != columns) throw ConfigError("dataset row has " + std::to_string(cells.size()) + " columns");
    Sample s;
    std::size_t c = 0;
    for (auto& v : s.features) v = detail::parse_cell(cells[c++]);
    s.label = detail::parse_cell(cells[c++]);
    s.meta.replication = static_cast<int>(detail::parse_cell(cells[c++]));
    s.meta.patient_id = std::stoull(cells[c++]);
    s.meta.facility = static_cast<int>(detail::parse_cell(cells[c++]));
    s.meta.flow_case = static_cast<int>(detail::parse_cell(cells[c++]));
    s.meta.arrival = detail::parse_cell(cells[c++]);
    for (auto& v : s.meta.sojourn) v = detail::parse_cell(cells[c++]);
    for (auto& v : s.meta.aqt_station) v = detail::parse_cell(cells[c++]);
    s.meta.aqt_total = detail::parse_cell(cells[c++]);
    data.push_back(s);
  }
  return data;
}

// Type-7 (linear interpolation) sample quantile of sorted values.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Box-and-whisker fences on the label: [Q1 - 1.5 IQR, Q3 + 1.5 IQR].
inline std::pair<double, double> iqr_fences(const std::vector<double>& labels) {
  std::vector<double> sorted = labels;
  std::sort(sorted.begin(), sorted.end());
  const double q1 = quantile_sorted(sorted, 0.25);
  const double q3 = quantile_sorted(sorted, 0.75);
  const double iqr = q3 - q1;
  return {q1 - 1.5 * iqr, q3 + 1.5 * iqr};
}

template <class Row, class LabelOf>
std::vector<Row> iqr_filter(const std::vector<Row>& rows, LabelOf label_of) {
  if (rows.empty()) throw std::invalid_argument("iqr_filter on empty dataset");
  std::vector<double> labels;
  labels.reserve(rows.size());
  for (const auto& r : rows) labels.push_back(label_of(r));
  const auto [lo, hi] = iqr_fences(labels);
  std::vector<Row> kept;
  for (const auto& r : rows) {
    const double y = label_of(r);
    if (y >= lo && y <= hi) kept.push_back(r);
  }
  return kept;
}

inline Dataset iqr_filter(const Dataset& data) {
  return iqr_filter(data, [](const Sample& s) { return s.label; });
}

// Deterministic shuffled split: round(n * fraction) rows go to training.
template <class Row>
std::pair<std::vector<Row>, std::vector<Row>> train_test_split(const std::vector<Row>& rows, double fraction,
                                                               std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("split fraction must be in (0,1)");
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  sim::Xoshiro256 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(rows.size()) * fraction));
  std::pair<std::vector<Row>, std::vector<Row>> out;
  for (std::size_t i = 0; i < order.size(); ++i) (i < n_train ? out.first : out.second).push_back(rows[order[i]]);
  return out;
}

}  // namespace rtlos::simml
