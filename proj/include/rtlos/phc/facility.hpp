#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rtlos/phc/config.hpp"
#include "rtlos/phc/routing.hpp"
#include "rtlos/phc/types.hpp"
#include "rtlos/sim/calendar.hpp"
#include "rtlos/sim/resource.hpp"
#include "rtlos/sim/rng.hpp"

namespace rtlos::phc {

enum class EventKind : std::uint8_t { OutpatientArrival, PriorityArrival, ServiceEnd };

constexpr std::string_view name_of(EventKind k) {
  switch (k) {
    case EventKind::OutpatientArrival: return "arrival";
    case EventKind::PriorityArrival: return "priority_arrival";
    case EventKind::ServiceEnd: return "service_end";
  }
  return "?";
}

struct FacilityEvent {
  EventKind kind = EventKind::OutpatientArrival;
  PatientClass cls = PatientClass::Outpatient;
  StationId station = StationId::Ncd;
  int server = 0;
  std::uint64_t patient = 0;
};

// One PHC: four stations, the doctor's non-preemptive priority queue, and the
// around-the-clock inpatient/childbirth arrival processes. Outpatients are
// admitted from outside (see Network), already carrying their service draws.
//
// The whole object is a value. Copying it snapshots the clock, calendar,
// station states, patients on site or en route, and the facility-local random
// streams; a copy driven by the same inputs replays the same trace.
class Facility {
 public:
  static constexpr std::uint64_t kPriorityIdBase = std::uint64_t{1} << 62;

  Facility(int index, FacilityConfig cfg, std::uint64_t master_seed)
      : index_(index), cfg_(std::make_shared<const FacilityConfig>(std::move(cfg))), streams_(master_seed) {
    cfg_->validate();
    for (auto s : kStations) stations_[index_of(s)] = sim::PriorityResource(cfg_->servers[index_of(s)]);
  }

  int index() const { return index_; }
  const FacilityConfig& config() const { return *cfg_; }
  double now() const { return calendar_.now(); }

  Facility snapshot() const { return *this; }
  void restore(const Facility& snapshot) { *this = snapshot; }

  // Forward copy for what-if runs: same state, no trace, no collected output.
  Facility clone() const {
    Facility copy = *this;
    copy.completed_.clear();
    copy.trace_ = nullptr;
    return copy;
  }

  void set_trace(std::ostream* out) { trace_ = out; }

  // Mean outpatient interarrival the predictors should assume from now on.
  void set_predictor_interarrival(double minutes) {
    auto cfg = *cfg_;
    cfg.predictor_interarrival = minutes;
    cfg.validate();
    cfg_ = std::make_shared<const FacilityConfig>(std::move(cfg));
  }

  // Busy time is accumulated only for the part of each service inside
  // [from, to).
  void set_measurement_window(double from, double to) {
    window_from_ = from;
    window_to_ = to;
  }

  // Starts the inpatient and childbirth arrival processes; no arrival is
  // generated at or after `until`.
  void start_priority_arrivals(double until) {
    generate_until_ = until;
    for (auto cls : {PatientClass::Inpatient, PatientClass::Childbirth}) {
      const double t = now() + sim::sample(cfg_->interarrival(cls), arrival_stream(cls));
      if (t < generate_until_) calendar_.schedule(t, FacilityEvent{EventKind::PriorityArrival, cls});
    }
  }

  // Registers a patient travelling to this facility (normally an outpatient);
  // they join their first queue at `patient.arrival`.
  void admit(Patient patient) {
    patient.visited = index_;
    const double at = patient.arrival;
    const auto id = patient.id;
    roster_.push_back(std::move(patient));
    calendar_.schedule(at, FacilityEvent{EventKind::OutpatientArrival, PatientClass::Outpatient, StationId::Ncd, 0, id});
  }

  double next_event_time() const {
    return calendar_.empty() ? std::numeric_limits<double>::infinity() : calendar_.next_time();
  }

  bool step() {
    if (calendar_.empty()) return false;
    auto ev = calendar_.pop();
    dispatch(ev);
    return true;
  }

  std::size_t run_until(double t) {
    return calendar_.run_until(t, [this](const sim::Event<FacilityEvent>& ev) { dispatch(ev); });
  }

  // Runs until no patient is on site or en route. Priority arrival processes
  // must have been bounded by start_priority_arrivals(until).
  void drain() {
    while (!calendar_.empty()) step();
  }

  FacilityState observe() const {
    FacilityState state;
    state.at = now();
    for (auto s : kStations) {
      const auto& res = stations_[index_of(s)];
      auto& sub = state[s];
      sub.station = s;
      sub.observed_at = now();
      for (const auto& entry : res.queue()) {
        switch (find(entry.entity).cls) {
          case PatientClass::Outpatient: ++sub.queue_outpatient; break;
          case PatientClass::Inpatient: ++sub.queue_inpatient; break;
          case PatientClass::Childbirth: ++sub.queue_childbirth; break;
        }
      }
      sub.servers.clear();
      for (const auto& slot : res.servers()) {
        ServerView view;
        if (slot.busy) {
          view.busy = true;
          view.elapsed = now() - slot.start;
          view.cls = find(slot.entity).cls;
        }
        sub.servers.push_back(view);
      }
    }
    return state;
  }

  const sim::PriorityResource& station(StationId s) const { return stations_[index_of(s)]; }

  std::vector<Patient> take_completed() {
    std::vector<Patient> out;
    out.swap(completed_);
    return out;
  }
  const std::vector<Patient>& completed() const { return completed_; }

  // Patients on site or en route.
  const std::vector<Patient>& roster() const { return roster_; }
  bool has_patient(std::uint64_t id) const {
    return std::any_of(roster_.begin(), roster_.end(), [&](const Patient& p) { return p.id == id; });
  }

  double busy_time(StationId s) const { return busy_[index_of(s)]; }
  std::uint64_t arrived(PatientClass c) const { return arrived_[static_cast<std::size_t>(c)]; }
  std::uint64_t exited(PatientClass c) const { return exited_[static_cast<std::size_t>(c)]; }
  std::uint64_t in_system(PatientClass c) const {
    return static_cast<std::uint64_t>(
        std::count_if(roster_.begin(), roster_.end(), [&](const Patient& p) { return p.cls == c && on_site(p); }));
  }
  const sim::EventCalendar<FacilityEvent>& calendar() const { return calendar_; }

 private:
  static bool on_site(const Patient& p) {
    for (const auto& v : p.stations)
      if (!std::isnan(v.enter)) return true;
    return false;
  }

  sim::Xoshiro256& arrival_stream(PatientClass c) {
    return streams_.stream({sim::StreamKind::Arrival, static_cast<std::uint16_t>(index_), static_cast<std::uint16_t>(c)});
  }
  sim::Xoshiro256& service_stream(StationId s) {
    return streams_.stream(
        {sim::StreamKind::Service, static_cast<std::uint16_t>(index_), static_cast<std::uint16_t>(index_of(s))});
  }

  std::size_t position(std::uint64_t id) const {
    for (std::size_t i = 0; i < roster_.size(); ++i)
      if (roster_[i].id == id) return i;
    throw std::logic_error("patient " + std::to_string(id) + " not at facility " + std::to_string(index_));
  }
  const Patient& find(std::uint64_t id) const { return roster_[position(id)]; }

  void trace(const sim::Event<FacilityEvent>& ev) const {
    if (!trace_) return;
    *trace_ << ev.time << '\t' << ev.sequence << '\t' << name_of(ev.payload.kind) << '\t' << ev.payload.patient
            << '\t' << (ev.payload.kind == EventKind::ServiceEnd ? name_of(ev.payload.station) : "-") << '\t'
            << index_ << '\n';
  }

  void dispatch(const sim::Event<FacilityEvent>& ev) {
    switch (ev.payload.kind) {
      case EventKind::OutpatientArrival: {
        const auto pos = position(ev.payload.patient);
        trace(ev);
        ++arrived_[static_cast<std::size_t>(roster_[pos].cls)];
        enter(pos, *route(roster_[pos], std::nullopt));
        break;
      }
      case EventKind::PriorityArrival: on_priority_arrival(ev); break;
      case EventKind::ServiceEnd: on_service_end(ev); break;
    }
  }

  void on_priority_arrival(const sim::Event<FacilityEvent>& ev) {
    const auto cls = ev.payload.cls;
    const double next = now() + sim::sample(cfg_->interarrival(cls), arrival_stream(cls));
    if (next < generate_until_) calendar_.schedule(next, FacilityEvent{EventKind::PriorityArrival, cls});
    // Outside OPD hours the duty nurse attends; nothing enters a modeled queue.
    if (!cfg_->in_opd_window(now())) return;

    Patient p;
    p.id = kPriorityIdBase | (static_cast<std::uint64_t>(index_) << 48) | next_priority_id_++;
    p.cls = cls;
    p.preferred = p.visited = index_;
    p.decided_at = p.arrival = now();
    p.at(StationId::Doctor).service = sim::sample(cfg_->service(StationId::Doctor, cls), service_stream(StationId::Doctor));
    auto traced = ev;
    traced.payload.patient = p.id;
    trace(traced);
    ++arrived_[static_cast<std::size_t>(cls)];
    roster_.push_back(p);
    enter(roster_.size() - 1, StationId::Doctor);
  }

  void enter(std::size_t pos, StationId s) {
    auto& p = roster_[pos];
    p.at(s).enter = now();
    auto& res = stations_[index_of(s)];
    const auto server = res.idle_server();
    if (server && !res.has_waiting()) {
      start(s, *server, pos);
    } else {
      res.enqueue(sim::QueueEntry{p.id, priority_of(p.cls), now()});
    }
  }

  void start(StationId s, int server, std::size_t pos) {
    auto& p = roster_[pos];
    auto& visit = p.at(s);
    visit.start = now();
    const double end = now() + visit.service;
    stations_[index_of(s)].seize(server, p.id, priority_of(p.cls), now(), end);
    calendar_.schedule(end, FacilityEvent{EventKind::ServiceEnd, p.cls, s, server, p.id});
  }

  void on_service_end(const sim::Event<FacilityEvent>& ev) {
    trace(ev);
    const auto s = ev.payload.station;
    auto& res = stations_[index_of(s)];
    const auto slot = res.release(ev.payload.server);
    const double lo = std::max(slot.start, window_from_);
    const double hi = std::min(slot.end, window_to_);
    if (hi > lo) busy_[index_of(s)] += hi - lo;

    auto pos = position(slot.entity);
    roster_[pos].at(s).end = now();

    if (res.has_waiting()) {
      const auto next = res.pop_next();
      start(s, ev.payload.server, position(next.entity));
    }

    pos = position(slot.entity);
    if (const auto next_station = route(roster_[pos], s)) {
      enter(pos, *next_station);
    } else {
      leave(pos);
    }
  }

  void leave(std::size_t pos) {
    Patient p = std::move(roster_[pos]);
    roster_.erase(roster_.begin() + static_cast<std::ptrdiff_t>(pos));
    p.exit = now();
    ++exited_[static_cast<std::size_t>(p.cls)];
    if (p.cls == PatientClass::Outpatient) completed_.push_back(std::move(p));
  }

  int index_;
  std::shared_ptr<const FacilityConfig> cfg_;
  sim::EventCalendar<FacilityEvent> calendar_;
  std::array<sim::PriorityResource, 4> stations_;
  std::vector<Patient> roster_;
  std::vector<Patient> completed_;
  sim::RngStreams streams_;
  double generate_until_ = std::numeric_limits<double>::infinity();
  std::uint64_t next_priority_id_ = 0;
  double window_from_ = 0.0;
  double window_to_ = std::numeric_limits<double>::infinity();
  std::array<double, 4> busy_{};
  std::array<std::uint64_t, 3> arrived_{};
  std::array<std::uint64_t, 3> exited_{};
  std::ostream* trace_ = nullptr;
};

}  // namespace rtlos::phc
