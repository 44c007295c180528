#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "rtlos/error.hpp"
#include "rtlos/phc/types.hpp"
#include "rtlos/sim/distribution.hpp"

namespace rtlos::phc {

using sim::ServiceDistribution;

inline constexpr double kMinutesPerDay = 1440.0;

// One primary health center. Defaults are the field estimates for a PHC with
// an outpatient interarrival time of 9 minutes.
struct FacilityConfig {
  std::string name = "PHC";

  ServiceDistribution outpatient_interarrival = sim::Exponential{9.0};
  ServiceDistribution inpatient_interarrival = sim::Exponential{2880.0};
  ServiceDistribution childbirth_interarrival = sim::Exponential{2880.0};

  ServiceDistribution ncd_service = sim::Uniform{2.0, 5.0};
  ServiceDistribution doctor_outpatient_service = sim::Gaussian{0.87, 0.21};
  ServiceDistribution doctor_inpatient_service = sim::Uniform{10.0, 30.0};
  ServiceDistribution doctor_childbirth_service = sim::Uniform{30.0, 60.0};
  ServiceDistribution lab_service = sim::Gaussian{3.45, 0.83};
  ServiceDistribution pharmacy_service = sim::Gaussian{2.08, 0.72};

  std::array<int, 4> servers{1, 1, 1, 1};
  double lab_visit_prob = 0.5;
  double ncd_age_fraction = 0.5;  // share of outpatients aged >= threshold
  double ncd_age_threshold = 30.0;
  double opd_open = 0.0;  // minute of the day the outpatient window opens
  double opd_minutes = 480.0;

  // Mean outpatient interarrival fed to the predictors; defaults to the mean of
  // `outpatient_interarrival`. Calibration replaces it with the effective value.
  std::optional<double> predictor_interarrival;

  const ServiceDistribution& service(StationId s, PatientClass c = PatientClass::Outpatient) const {
    switch (s) {
      case StationId::Ncd: return ncd_service;
      case StationId::Doctor:
        if (c == PatientClass::Inpatient) return doctor_inpatient_service;
        if (c == PatientClass::Childbirth) return doctor_childbirth_service;
        return doctor_outpatient_service;
      case StationId::Laboratory: return lab_service;
      case StationId::Pharmacy: return pharmacy_service;
    }
    return pharmacy_service;
  }

  const ServiceDistribution& interarrival(PatientClass c) const {
    if (c == PatientClass::Inpatient) return inpatient_interarrival;
    if (c == PatientClass::Childbirth) return childbirth_interarrival;
    return outpatient_interarrival;
  }

  double outpatient_lambda() const {
    return predictor_interarrival ? *predictor_interarrival : sim::mean(outpatient_interarrival);
  }

  bool in_opd_window(double t) const {
    const double minute = std::fmod(t - opd_open, kMinutesPerDay);
    const double m = minute < 0.0 ? minute + kMinutesPerDay : minute;
    return m < opd_minutes;
  }

  // Start of the OPD window of the day containing `t` (day boundaries are
  // aligned to the window opening).
  double window_open(double t) const {
    return opd_open + std::floor((t - opd_open) / kMinutesPerDay) * kMinutesPerDay;
  }

  void validate() const {
    for (const auto* d : {&outpatient_interarrival, &inpatient_interarrival, &childbirth_interarrival, &ncd_service,
                          &doctor_outpatient_service, &doctor_inpatient_service, &doctor_childbirth_service,
                          &lab_service, &pharmacy_service})
      sim::validate(*d);
    for (int n : servers)
      if (n < 1) throw ConfigError("facility '" + name + "': server counts must be >= 1");
    auto prob = [&](double p, const char* what) {
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("facility '" + name + "': " + what + " must be in [0,1]");
    };
    prob(lab_visit_prob, "lab_visit_prob");
    prob(ncd_age_fraction, "ncd_age_fraction");
    if (!(opd_minutes > 0.0 && opd_minutes <= kMinutesPerDay))
      throw ConfigError("facility '" + name + "': opd_minutes must be in (0, 1440]");
    if (!(ncd_age_threshold >= 0.0)) throw ConfigError("facility '" + name + "': ncd_age_threshold must be >= 0");
    if (predictor_interarrival && !(*predictor_interarrival > 0.0))
      throw ConfigError("facility '" + name + "': predictor_interarrival must be > 0");
  }
};

}  // namespace rtlos::phc
