#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rtlos/error.hpp"
#include "rtlos/phc/config.hpp"
#include "rtlos/phc/network.hpp"
#include "rtlos/rthfa/predictors.hpp"

namespace rtlos::experiments {

// Everything a run needs. `predictor` empty means no assignment: every
// outpatient visits their usual facility.
struct ScenarioConfig {
  std::string name = "scenario";
  std::vector<phc::FacilityConfig> facilities;
  phc::TravelMatrix travel;
  std::optional<rthfa::PredictorKind> predictor;
  double compliance = 1.0;
  double horizon_days = 365.0;
  double warmup_days = 180.0;
  int replications = 1;
  std::uint64_t seed = 1;

  // Effective interarrival calibration, run once per scenario before the
  // replications when an AQT or Sim-ML predictor is used.
  bool calibrate = true;
  double t0_days = 90.0;
  double epsilon = 0.1;
  int max_windows = 20;
  double relaxation = 1.0;

  // Sim-ML training data: AQT-driven runs of the same network.
  int knn_k = 2;
  int train_replications = 2;
  double train_days = 180.0;
  double train_warmup_days = 30.0;
  // Deterministic subsample cap for the assignment-time model; query cost
  // grows with the training size while accuracy stays flat.
  int train_max_samples = 20000;

  std::string out_dir = "out";

  double horizon() const { return horizon_days * phc::kMinutesPerDay; }
  double warmup() const { return warmup_days * phc::kMinutesPerDay; }

  void validate() const {
    if (facilities.empty()) throw ConfigError("scenario needs at least one [facility]");
    for (const auto& f : facilities) f.validate();
    travel.validate(facilities.size());
    if (!(horizon_days > warmup_days && warmup_days >= 0.0))
      throw ConfigError("horizon_days must exceed warmup_days >= 0");
    if (replications < 1) throw ConfigError("replications must be >= 1");
    if (!(compliance >= 0.0 && compliance <= 1.0)) throw ConfigError("compliance must be in [0,1]");
    if (!(t0_days >= 1.0)) throw ConfigError("t0_days must be >= 1");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
    if (max_windows < 1) throw ConfigError("max_windows must be >= 1");
    if (!(relaxation > 0.0 && relaxation <= 1.0)) throw ConfigError("relaxation must be in (0,1]");
    if (knn_k < 1) throw ConfigError("knn_k must be >= 1");
    if (train_max_samples < knn_k) throw ConfigError("train_max_samples must be >= knn_k");
    if (train_replications < 1) throw ConfigError("train_replications must be >= 1");
    if (!(train_days > train_warmup_days && train_warmup_days >= 0.0))
      throw ConfigError("train_days must exceed train_warmup_days >= 0");
  }
};

// Default two-PHC network: PHC1 at 9 min and PHC2 at 2 min outpatient interarrival,
// 15 min to the usual facility and 30 min to the other.
inline ScenarioConfig default_scenario() {
  ScenarioConfig s;
  s.name = "two_phc";
  phc::FacilityConfig a;
  a.name = "PHC1";
  phc::FacilityConfig b = a;
  b.name = "PHC2";
  b.outpatient_interarrival = sim::Exponential{2.0};
  s.facilities = {a, b};
  s.travel = phc::TravelMatrix::uniform(2, 15.0, 30.0);
  return s;
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline double to_double(const std::string& v, const std::string& where) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ConfigError(where + ": expected a number, got '" + v + "'");
  return out;
}

inline int to_int(const std::string& v, const std::string& where) {
  const double d = to_double(v, where);
  if (d != static_cast<double>(static_cast<long long>(d))) throw ConfigError(where + ": expected an integer");
  return static_cast<int>(d);
}

inline bool to_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(where + ": expected true or false, got '" + v + "'");
}

inline void set_facility_key(phc::FacilityConfig& f, const std::string& key, const std::string& value,
                             const std::string& where) {
  using sim::parse_distribution;
  if (key == "outpatient_interarrival") f.outpatient_interarrival = parse_distribution(value);
  else if (key == "inpatient_interarrival") f.inpatient_interarrival = parse_distribution(value);
  else if (key == "childbirth_interarrival") f.childbirth_interarrival = parse_distribution(value);
  else if (key == "ncd_service") f.ncd_service = parse_distribution(value);
  else if (key == "doctor_outpatient_service") f.doctor_outpatient_service = parse_distribution(value);
  else if (key == "doctor_inpatient_service") f.doctor_inpatient_service = parse_distribution(value);
  else if (key == "doctor_childbirth_service") f.doctor_childbirth_service = parse_distribution(value);
  else if (key == "lab_service") f.lab_service = parse_distribution(value);
  else if (key == "pharmacy_service") f.pharmacy_service = parse_distribution(value);
  else if (key == "ncd_servers") f.servers[0] = to_int(value, where);
  else if (key == "doctor_servers") f.servers[1] = to_int(value, where);
  else if (key == "lab_servers") f.servers[2] = to_int(value, where);
  else if (key == "pharmacy_servers") f.servers[3] = to_int(value, where);
  else if (key == "lab_visit_prob") f.lab_visit_prob = to_double(value, where);
  else if (key == "ncd_age_fraction") f.ncd_age_fraction = to_double(value, where);
  else if (key == "ncd_age_threshold") f.ncd_age_threshold = to_double(value, where);
  else if (key == "opd_open") f.opd_open = to_double(value, where);
  else if (key == "opd_minutes") f.opd_minutes = to_double(value, where);
  else if (key == "predictor_interarrival") f.predictor_interarrival = to_double(value, where);
  else throw ConfigError(where + ": unknown facility key '" + key + "'");
}

inline void set_scenario_key(ScenarioConfig& s, const std::string& key, const std::string& value,
                             const std::string& where) {
  if (key == "name") s.name = value;
  else if (key == "predictor") {
    if (value == "none") s.predictor.reset();
    else s.predictor = rthfa::parse_predictor(value);
  } else if (key == "compliance") s.compliance = to_double(value, where);
  else if (key == "horizon_days") s.horizon_days = to_double(value, where);
  else if (key == "warmup_days") s.warmup_days = to_double(value, where);
  else if (key == "replications") s.replications = to_int(value, where);
  else if (key == "seed") s.seed = static_cast<std::uint64_t>(std::stoull(value));
  else if (key == "calibrate") s.calibrate = to_bool(value, where);
  else if (key == "t0_days") s.t0_days = to_double(value, where);
  else if (key == "epsilon") s.epsilon = to_double(value, where);
  else if (key == "max_windows") s.max_windows = to_int(value, where);
  else if (key == "relaxation") s.relaxation = to_double(value, where);
  else if (key == "knn_k") s.knn_k = to_int(value, where);
  else if (key == "train_replications") s.train_replications = to_int(value, where);
  else if (key == "train_max_samples") s.train_max_samples = to_int(value, where);
  else if (key == "train_days") s.train_days = to_double(value, where);
  else if (key == "train_warmup_days") s.train_warmup_days = to_double(value, where);
  else if (key == "out_dir") s.out_dir = value;
  else throw ConfigError(where + ": unknown scenario key '" + key + "'");
}

}  // namespace detail

// Line-oriented format. '#' starts a comment. Sections:
//   [scenario]        key = value pairs of ScenarioConfig
//   [facility NAME]   key = value pairs of FacilityConfig, distributions as
//                     exp(m), uniform(a,b), normal(mu,sigma) or const(c);
//                     facilities are indexed in order of appearance
//   [travel]          NAME = minutes to each facility, in facility order
// A missing [travel] section means 15 min to the usual facility and 30 min
// to every other.
inline ScenarioConfig parse_scenario(std::istream& in, const std::string& source = "<config>") {
  ScenarioConfig s;
  std::vector<std::pair<std::string, std::vector<double>>> travel_rows;
  enum class Section { None, Scenario, Facility, Travel } section = Section::None;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string where = source + ":" + std::to_string(number);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      const auto header = detail::trim(line.substr(1, line.size() - 2));
      if (header == "scenario") {
        section = Section::Scenario;
      } else if (header == "travel") {
        section = Section::Travel;
      } else if (header.rfind("facility", 0) == 0) {
        section = Section::Facility;
        phc::FacilityConfig f;
        f.name = detail::trim(header.substr(8));
        if (f.name.empty()) f.name = "PHC" + std::to_string(s.facilities.size() + 1);
        s.facilities.push_back(f);
      } else {
        throw ConfigError(where + ": unknown section [" + header + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));
    switch (section) {
      case Section::None: throw ConfigError(where + ": key outside a section");
      case Section::Scenario: detail::set_scenario_key(s, key, value, where); break;
      case Section::Facility: detail::set_facility_key(s.facilities.back(), key, value, where); break;
      case Section::Travel: {
        std::istringstream row(value);
        std::vector<double> minutes;
        std::string cell;
        while (row >> cell) minutes.push_back(detail::to_double(cell, where));
        travel_rows.emplace_back(key, std::move(minutes));
        break;
      }
    }
  }

  if (travel_rows.empty()) {
    s.travel = phc::TravelMatrix::uniform(static_cast<int>(s.facilities.size()), 15.0, 30.0);
  } else {
    s.travel.minutes.assign(s.facilities.size(), {});
    for (auto& [origin, minutes] : travel_rows) {
      std::size_t i = 0;
      while (i < s.facilities.size() && s.facilities[i].name != origin) ++i;
      if (i == s.facilities.size()) throw ConfigError(source + ": [travel] names unknown facility '" + origin + "'");
      s.travel.minutes[i] = std::move(minutes);
    }
  }
  s.validate();
  return s;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_scenario(in, path);
}

}  // namespace rtlos::experiments
