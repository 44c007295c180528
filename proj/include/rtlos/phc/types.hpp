#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

namespace rtlos::phc {

enum class StationId : std::uint8_t { Ncd = 0, Doctor = 1, Laboratory = 2, Pharmacy = 3 };

inline constexpr std::array<StationId, 4> kStations{StationId::Ncd, StationId::Doctor, StationId::Laboratory,
                                                    StationId::Pharmacy};

constexpr std::size_t index_of(StationId s) { return static_cast<std::size_t>(s); }

constexpr std::string_view name_of(StationId s) {
  switch (s) {
    case StationId::Ncd: return "ncd";
    case StationId::Doctor: return "doctor";
    case StationId::Laboratory: return "lab";
    case StationId::Pharmacy: return "pharmacy";
  }
  return "?";
}

enum class PatientClass : std::uint8_t { Outpatient, Inpatient, Childbirth };

constexpr std::string_view name_of(PatientClass c) {
  switch (c) {
    case PatientClass::Outpatient: return "outpatient";
    case PatientClass::Inpatient: return "inpatient";
    case PatientClass::Childbirth: return "childbirth";
  }
  return "?";
}

// Inpatients and childbirth patients share one band ahead of outpatients.
constexpr int priority_of(PatientClass c) { return c == PatientClass::Outpatient ? 1 : 0; }

inline constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

struct StationVisit {
  double service = 0.0;  // pre-drawn service requirement
  double enter = kUnset;
  double start = kUnset;
  double end = kUnset;

  bool visited() const { return !std::isnan(end); }
  double wait() const { return start - enter; }
  double sojourn() const { return end - enter; }
};

struct Patient {
  std::uint64_t id = 0;
  PatientClass cls = PatientClass::Outpatient;
  double age = 0.0;
  bool via_ncd = false;    // age at or above the screening threshold
  bool needs_lab = false;  // routed to the laboratory after the doctor
  int preferred = 0;       // usual (nearest) facility
  int visited = 0;
  double decided_at = 0.0;  // decision instant t at the point of origin
  double arrival = 0.0;     // t + travel time
  double exit = kUnset;
  std::array<StationVisit, 4> stations{};

  StationVisit& at(StationId s) { return stations[index_of(s)]; }
  const StationVisit& at(StationId s) const { return stations[index_of(s)]; }
  double los() const { return exit - arrival; }
  bool done() const { return !std::isnan(exit); }
};

// Outpatient routing cases used to stratify predictor accuracy.
enum class FlowCase : std::uint8_t {
  NcdDoctorPharmacy = 1,
  NcdDoctorLabPharmacy = 2,
  DoctorLabPharmacy = 3,
  DoctorPharmacy = 4,
};

constexpr FlowCase flow_case(bool via_ncd, bool lab) {
  if (via_ncd) return lab ? FlowCase::NcdDoctorLabPharmacy : FlowCase::NcdDoctorPharmacy;
  return lab ? FlowCase::DoctorLabPharmacy : FlowCase::DoctorPharmacy;
}

struct ServerView {
  bool busy = false;
  double elapsed = 0.0;
  PatientClass cls = PatientClass::Outpatient;
};

// Observable state of one station: waiting counts per class and the elapsed
// service time of every server (0 when idle).
struct SubsystemState {
  StationId station = StationId::Ncd;
  int queue_outpatient = 0;
  int queue_inpatient = 0;
  int queue_childbirth = 0;
  std::vector<ServerView> servers{ServerView{}};
  double observed_at = 0.0;

  bool busy() const {
    for (const auto& s : servers)
      if (s.busy) return true;
    return false;
  }
  int queue_total() const { return queue_outpatient + queue_inpatient + queue_childbirth; }
};

struct FacilityState {
  double at = 0.0;
  std::array<SubsystemState, 4> stations{};

  const SubsystemState& operator[](StationId s) const { return stations[index_of(s)]; }
  SubsystemState& operator[](StationId s) { return stations[index_of(s)]; }
};

inline FacilityState empty_facility_state(double at = 0.0) {
  FacilityState state;
  state.at = at;
  for (auto s : kStations) {
    state[s].station = s;
    state[s].observed_at = at;
  }
  return state;
}

}  // namespace rtlos::phc
