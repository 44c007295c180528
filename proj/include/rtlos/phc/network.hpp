#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "rtlos/error.hpp"
#include "rtlos/phc/config.hpp"
#include "rtlos/phc/facility.hpp"
#include "rtlos/phc/routing.hpp"
#include "rtlos/sim/rng.hpp"

namespace rtlos::phc {

// Travel minutes from each patient origin (row) to each facility (column).
// Origin j is the catchment whose usual facility is j.
struct TravelMatrix {
  std::vector<std::vector<double>> minutes;

  double operator()(int origin, int facility) const {
    return minutes.at(static_cast<std::size_t>(origin)).at(static_cast<std::size_t>(facility));
  }

  static TravelMatrix uniform(int n, double preferred, double alternate) {
    TravelMatrix m;
    m.minutes.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), alternate));
    for (int i = 0; i < n; ++i) m.minutes[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = preferred;
    return m;
  }

  void validate(std::size_t n) const {
    if (minutes.size() != n) throw ConfigError("travel matrix must have one row per facility");
    for (const auto& row : minutes) {
      if (row.size() != n) throw ConfigError("travel matrix must be square");
      for (double d : row)
        if (!(d >= 0.0)) throw ConfigError("travel times must be >= 0");
    }
  }
};

class Network;

// Picks the facility an outpatient actually visits. Called with every facility
// advanced to the decision instant.
using Decider = std::function<int(Network&, const OutpatientSeed&)>;

// Facilities plus the outpatient demand of each catchment. Outpatients appear
// at their origin during the origin facility's OPD window, a decider picks the
// facility, and the patient joins its first queue after the travel time.
class Network {
 public:
  Network(std::vector<FacilityConfig> configs, TravelMatrix travel, std::uint64_t seed)
      : travel_(std::move(travel)), streams_(seed) {
    if (configs.empty()) throw ConfigError("network needs at least one facility");
    travel_.validate(configs.size());
    facilities_.reserve(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i)
      facilities_.emplace_back(static_cast<int>(i), std::move(configs[i]), seed);
    next_arrival_.assign(facilities_.size(), std::numeric_limits<double>::infinity());
  }

  std::size_t size() const { return facilities_.size(); }
  Facility& facility(int i) { return facilities_.at(static_cast<std::size_t>(i)); }
  const Facility& facility(int i) const { return facilities_.at(static_cast<std::size_t>(i)); }
  const std::vector<Facility>& facilities() const { return facilities_; }
  const TravelMatrix& travel() const { return travel_; }
  double now() const { return now_; }

  void set_decider(Decider decider) { decider_ = std::move(decider); }

  // Measures busy time from `from` onwards and starts all arrival processes;
  // nothing arrives at or after `until`.
  void start(double until, double measure_from = 0.0) {
    horizon_ = until;
    for (auto& f : facilities_) {
      f.set_measurement_window(measure_from, std::numeric_limits<double>::infinity());
      f.start_priority_arrivals(until);
    }
    for (std::size_t o = 0; o < facilities_.size(); ++o) schedule_next(static_cast<int>(o), 0.0);
  }

  // Advances the whole network to `t`, deciding and admitting every outpatient
  // that appears on the way.
  void run_until(double t) {
    for (;;) {
      int origin = -1;
      double at = std::numeric_limits<double>::infinity();
      for (std::size_t o = 0; o < next_arrival_.size(); ++o) {
        if (next_arrival_[o] < at) {
          at = next_arrival_[o];
          origin = static_cast<int>(o);
        }
      }
      if (origin < 0 || at > t) break;
      advance_facilities(at);
      appear(origin, at);
    }
    advance_facilities(t);
  }

  // Runs to the horizon, then lets every facility drain.
  void finish() {
    run_until(horizon_);
    for (auto& f : facilities_) {
      f.drain();
      collect(f);
    }
  }

  std::vector<Patient>& completed() { return completed_; }
  const std::vector<Patient>& completed() const { return completed_; }

  sim::Xoshiro256& stream(sim::StreamKey key) { return streams_.stream(key); }

 private:
  void advance_facilities(double t) {
    now_ = t;
    for (auto& f : facilities_) {
      f.run_until(t);
      collect(f);
    }
  }

  void collect(Facility& f) {
    for (auto& p : f.take_completed()) completed_.push_back(std::move(p));
  }

  sim::Xoshiro256& stream(sim::StreamKind kind, int origin, std::uint16_t index) {
    return streams_.stream({kind, static_cast<std::uint16_t>(origin), index});
  }

  // Next outpatient appearance at `origin` after `from`. A draw landing outside
  // the OPD window is discarded and the process restarts at the next opening.
  void schedule_next(int origin, double from) {
    const auto& cfg = facility(origin).config();
    auto& rng = stream(sim::StreamKind::Arrival, origin, 0);
    double base = from;
    for (;;) {
      const double t = base + sim::sample(cfg.outpatient_interarrival, rng);
      if (t >= horizon_) {
        next_arrival_[static_cast<std::size_t>(origin)] = std::numeric_limits<double>::infinity();
        return;
      }
      if (cfg.in_opd_window(t) && cfg.window_open(t) == cfg.window_open(base)) {
        next_arrival_[static_cast<std::size_t>(origin)] = t;
        return;
      }
      base = cfg.window_open(base) + kMinutesPerDay;
      if (base >= horizon_) {
        next_arrival_[static_cast<std::size_t>(origin)] = std::numeric_limits<double>::infinity();
        return;
      }
    }
  }

  void appear(int origin, double t) {
    const auto& origin_cfg = facility(origin).config();
    const auto seed = draw_outpatient(next_id_++, origin, t, origin_cfg, stream(sim::StreamKind::Routing, origin, 0),
                                      stream(sim::StreamKind::Routing, origin, 1));
    const int visited = decider_ ? decider_(*this, seed) : origin;
    if (visited < 0 || static_cast<std::size_t>(visited) >= facilities_.size())
      throw SimulationError("decider returned facility " + std::to_string(visited));
    auto& dest = facility(visited);
    dest.admit(materialize(seed, visited, travel_(origin, visited), dest.config()));
    schedule_next(origin, t);
  }

  std::vector<Facility> facilities_;
  TravelMatrix travel_;
  sim::RngStreams streams_;
  std::vector<double> next_arrival_;
  std::vector<Patient> completed_;
  Decider decider_;
  double horizon_ = 0.0;
  double now_ = 0.0;
  std::uint64_t next_id_ = 1;
};

}  // namespace rtlos::phc
