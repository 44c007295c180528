#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "rtlos/phc/network.hpp"
#include "rtlos/rthfa/assign.hpp"
#include "rtlos/simml/metrics.hpp"

namespace rtlos::experiments {

using simml::MeanSd;
using simml::mean_sd;

// |max - min| / max in percent; 0 when every value is 0.
inline double delta_net(const std::vector<double>& values) {
  if (values.size() < 2) throw std::invalid_argument("delta_net needs at least two facilities");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*hi == 0.0) return 0.0;
  return std::fabs(*hi - *lo) / *hi * 100.0;
}

// Share of outpatients who visited a facility other than their usual one, in
// percent. Non-compliant patients visit their usual facility and count as not
// diverted.
inline double beta_diverted(const std::vector<rthfa::AssignmentDecision>& decisions) {
  if (decisions.empty()) throw std::invalid_argument("beta_diverted needs at least one decision");
  std::size_t diverted = 0;
  for (const auto& d : decisions)
    if (d.visited != d.preferred) ++diverted;
  return 100.0 * static_cast<double>(diverted) / static_cast<double>(decisions.size());
}

// Per-facility outcomes, in this order everywhere (CSV columns, summaries).
enum class Metric : std::size_t { RhoNcd, RhoDoc, RhoLab, RhoPhar, WNcd, WOpd, WLab, WPhar, Los };
inline constexpr std::size_t kMetricCount = 9;
inline constexpr std::array<std::string_view, kMetricCount> kMetricNames{
    "rho_ncd", "rho_doc", "rho_lab", "rho_phar", "w_ncd", "w_opd", "w_lab", "w_phar", "los"};

struct FacilityOutcome {
  std::array<double, kMetricCount> values{};
  std::size_t outpatients = 0;

  double operator[](Metric m) const { return values[static_cast<std::size_t>(m)]; }
};

struct ReplicationOutcome {
  int replication = 0;
  std::vector<FacilityOutcome> facilities;
  double beta = 0.0;
  std::size_t decisions = 0;

  std::vector<double> across(Metric m) const {
    std::vector<double> out;
    for (const auto& f : facilities) out.push_back(f[m]);
    return out;
  }
};

// Statistics of one finished replication. Only outpatients arriving at or
// after `warmup` count; utilization is busy time inside [warmup, inf) over the
// scheduled OPD minutes of the measured days.
inline ReplicationOutcome measure(const phc::Network& net, double warmup, double horizon,
                                  const std::vector<rthfa::AssignmentDecision>& decisions, int replication = 0) {
  ReplicationOutcome out;
  out.replication = replication;
  out.facilities.resize(net.size());
  const double days = (horizon - warmup) / phc::kMinutesPerDay;
  std::vector<std::array<double, 5>> sums(net.size());
  std::vector<std::array<std::size_t, 5>> counts(net.size());
  for (const auto& p : net.completed()) {
    if (p.arrival < warmup) continue;
    const auto f = static_cast<std::size_t>(p.visited);
    for (auto s : phc::kStations) {
      const auto& v = p.at(s);
      if (!v.visited()) continue;
      sums[f][phc::index_of(s)] += v.wait();
      ++counts[f][phc::index_of(s)];
    }
    sums[f][4] += p.los();
    ++counts[f][4];
  }
  for (std::size_t f = 0; f < net.size(); ++f) {
    const auto& fac = net.facility(static_cast<int>(f));
    auto& o = out.facilities[f];
    for (auto s : phc::kStations) {
      const auto i = phc::index_of(s);
      o.values[i] = fac.busy_time(s) / (days * fac.config().opd_minutes);
      o.values[4 + i] = counts[f][i] ? sums[f][i] / static_cast<double>(counts[f][i]) : 0.0;
    }
    o.values[8] = counts[f][4] ? sums[f][4] / static_cast<double>(counts[f][4]) : 0.0;
    o.outpatients = counts[f][4];
  }
  out.decisions = decisions.size();
  out.beta = decisions.empty() ? 0.0 : beta_diverted(decisions);
  return out;
}

// Mean (SD) across replications, per facility and for the network-level
// Delta_net of each metric (computed per replication, then aggregated).
struct Summary {
  std::vector<std::array<MeanSd, kMetricCount>> facility;
  std::array<MeanSd, kMetricCount> delta{};
  MeanSd beta;
  int replications = 0;
};

inline Summary summarize(const std::vector<ReplicationOutcome>& reps) {
  Summary s;
  if (reps.empty()) return s;
  s.replications = static_cast<int>(reps.size());
  const auto n = reps.front().facilities.size();
  s.facility.resize(n);
  for (std::size_t m = 0; m < kMetricCount; ++m) {
    for (std::size_t f = 0; f < n; ++f) {
      std::vector<double> v;
      for (const auto& r : reps) v.push_back(r.facilities[f].values[m]);
      s.facility[f][m] = mean_sd(v);
    }
    if (n >= 2) {
      std::vector<double> d;
      for (const auto& r : reps) d.push_back(delta_net(r.across(static_cast<Metric>(m))));
      s.delta[m] = mean_sd(d);
    }
  }
  std::vector<double> b;
  for (const auto& r : reps) b.push_back(r.beta);
  s.beta = mean_sd(b);
  return s;
}

}  // namespace rtlos::experiments
