#pragma once

#include <cstdint>
#include <optional>

#include "rtlos/phc/config.hpp"
#include "rtlos/phc/types.hpp"
#include "rtlos/sim/rng.hpp"

namespace rtlos::phc {

// Next station after `completed` (nullopt = just arrived); nullopt result means
// the patient leaves the modeled part of the facility.
inline std::optional<StationId> route(const Patient& patient, std::optional<StationId> completed) {
  if (patient.cls != PatientClass::Outpatient) {
    // Inpatients and childbirth patients only occupy the doctor before moving
    // on to the ward or labor room.
    if (!completed) return StationId::Doctor;
    return std::nullopt;
  }
  if (!completed) return patient.via_ncd ? StationId::Ncd : StationId::Doctor;
  switch (*completed) {
    case StationId::Ncd: return StationId::Doctor;
    case StationId::Doctor: return patient.needs_lab ? StationId::Laboratory : StationId::Pharmacy;
    case StationId::Laboratory: return StationId::Pharmacy;
    case StationId::Pharmacy: return std::nullopt;
  }
  return std::nullopt;
}

// Facility-independent draws made when an outpatient appears at its origin.
struct OutpatientSeed {
  std::uint64_t id = 0;
  int origin = 0;
  double decided_at = 0.0;
  double age = 0.0;
  double lab_draw = 0.0;  // uniform in [0,1); routed to the lab iff below p_l
  std::uint64_t service_seed = 0;
};

inline OutpatientSeed draw_outpatient(std::uint64_t id, int origin, double t, const FacilityConfig& origin_cfg,
                                      sim::Xoshiro256& routing, sim::Xoshiro256& service) {
  OutpatientSeed seed;
  seed.id = id;
  seed.origin = origin;
  seed.decided_at = t;
  const double threshold = origin_cfg.ncd_age_threshold;
  if (routing.uniform01() < origin_cfg.ncd_age_fraction)
    seed.age = threshold + (80.0 - threshold) * routing.uniform01();
  else
    seed.age = threshold * routing.uniform01();
  seed.lab_draw = routing.uniform01();
  seed.service_seed = service();
  return seed;
}

// Builds the patient record for a visit to `facility`. Service requirements
// come from the patient's own seed, so every candidate facility sees the same
// draws (common random numbers) and the realized visit matches any forward
// clone of it.
inline Patient materialize(const OutpatientSeed& seed, int facility, double travel, const FacilityConfig& cfg) {
  Patient p;
  p.id = seed.id;
  p.cls = PatientClass::Outpatient;
  p.age = seed.age;
  p.via_ncd = seed.age >= cfg.ncd_age_threshold;
  p.needs_lab = seed.lab_draw < cfg.lab_visit_prob;
  p.preferred = seed.origin;
  p.visited = facility;
  p.decided_at = seed.decided_at;
  p.arrival = seed.decided_at + travel;
  sim::Xoshiro256 rng(seed.service_seed);
  for (auto s : kStations) p.at(s).service = sim::sample(cfg.service(s), rng);
  return p;
}

}  // namespace rtlos::phc
