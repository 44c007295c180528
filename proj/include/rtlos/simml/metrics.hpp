#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace rtlos::simml {

// Mean absolute percentage error, in percent.
inline double mape(const std::vector<double>& actual, const std::vector<double>& predicted) {
  if (actual.size() != predicted.size()) throw std::invalid_argument("mape: length mismatch");
  if (actual.empty()) throw std::invalid_argument("mape: no observations");
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] == 0.0) throw std::invalid_argument("mape: zero actual value");
    sum += std::fabs((actual[i] - predicted[i]) / actual[i]);
  }
  return 100.0 * sum / static_cast<double>(actual.size());
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation; 0 for a single value
  std::size_t n = 0;
};

inline MeanSd mean_sd(const std::vector<double>& values) {
  MeanSd out;
  out.n = values.size();
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

// Actual/predicted pairs grouped by an integer stratum (routing case or
// station). Strata without observations report no value.
class StratifiedMape {
 public:
  void add(int stratum, double actual, double predicted) {
    auto& s = strata_[stratum];
    s.first.push_back(actual);
    s.second.push_back(predicted);
  }

  std::optional<double> value(int stratum) const {
    const auto it = strata_.find(stratum);
    if (it == strata_.end() || it->second.first.empty()) return std::nullopt;
    return mape(it->second.first, it->second.second);
  }

  std::size_t count(int stratum) const {
    const auto it = strata_.find(stratum);
    return it == strata_.end() ? 0 : it->second.first.size();
  }

 private:
  std::map<int, std::pair<std::vector<double>, std::vector<double>>> strata_;
};

}  // namespace rtlos::simml
