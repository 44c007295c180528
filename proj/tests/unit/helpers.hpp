#pragma once

#include <limits>
#include <sstream>
#include <string>

#include "rtlos/phc/config.hpp"
#include "rtlos/phc/facility.hpp"
#include "rtlos/phc/types.hpp"

namespace rtlos::test {

// Facility config without inpatient or childbirth traffic.
inline phc::FacilityConfig quiet_config(double outpatient_interarrival = 9.0) {
  phc::FacilityConfig cfg;
  cfg.outpatient_interarrival = sim::Exponential{outpatient_interarrival};
  cfg.inpatient_interarrival = sim::Constant{1e12};
  cfg.childbirth_interarrival = sim::Constant{1e12};
  return cfg;
}

// Every service time fixed, so hand traces are exact.
inline phc::FacilityConfig constant_config() {
  auto cfg = quiet_config();
  cfg.ncd_service = sim::Constant{3.0};
  cfg.doctor_outpatient_service = sim::Constant{1.0};
  cfg.doctor_inpatient_service = sim::Constant{20.0};
  cfg.doctor_childbirth_service = sim::Constant{45.0};
  cfg.lab_service = sim::Constant{4.0};
  cfg.pharmacy_service = sim::Constant{2.0};
  return cfg;
}

inline phc::Patient patient(std::uint64_t id, double arrival, double age, bool lab,
                            phc::PatientClass cls = phc::PatientClass::Outpatient,
                            std::array<double, 4> service = {3.0, 1.0, 4.0, 2.0}) {
  phc::Patient p;
  p.id = id;
  p.cls = cls;
  p.age = age;
  p.via_ncd = age >= 30.0;
  p.needs_lab = lab;
  p.arrival = p.decided_at = arrival;
  for (std::size_t i = 0; i < 4; ++i) p.stations[i].service = service[i];
  return p;
}

}  // namespace rtlos::test
