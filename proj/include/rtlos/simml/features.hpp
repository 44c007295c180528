#pragma once

#include <array>
#include <cstddef>
#include <string_view>

#include "rtlos/aqt/predictor.hpp"
#include "rtlos/phc/types.hpp"

namespace rtlos::simml {

inline constexpr std::string_view kSchemaVersion = "rtlos-features v1";

// One candidate facility as seen by an outpatient deciding at t who would
// arrive at t + delta. Remaining times use the piecewise estimator; the t + delta
// block is the AQT extrapolation.
inline constexpr std::array<std::string_view, 21> kFeatureNames{
    "q_ncd_t",      "q_doc_op_t",   "q_doc_ip_t",  "q_doc_cbp_t",  "q_lab_t",     "q_phar_t",     "w_ncd_t",
    "w_doc_t",      "w_lab_t",      "w_phar_t",    "q_ncd_td",     "q_doc_op_td", "q_doc_hp_td",  "q_lab_td",
    "q_phar_td",    "w_ncd_td",     "w_doc_td",    "w_lab_td",     "w_phar_td",   "travel_min",   "age_ge30",
};

inline constexpr std::size_t kFeatureCount = kFeatureNames.size();

using FeatureVector = std::array<double, kFeatureCount>;

inline FeatureVector extract_features(const phc::FacilityState& state, const aqt::AqtParams& params,
                                      const aqt::AqtBreakdown& at_arrival, double travel, bool via_ncd) {
  using phc::StationId;
  const auto& ncd = state[StationId::Ncd];
  const auto& doc = state[StationId::Doctor];
  const auto& lab = state[StationId::Laboratory];
  const auto& phar = state[StationId::Pharmacy];
  const auto doctor_dist = [&](phc::PatientClass c) -> const sim::ServiceDistribution& { return params.doctor(c); };
  const auto single = [](const sim::ServiceDistribution& d) {
    return [&d](phc::PatientClass) -> const sim::ServiceDistribution& { return d; };
  };
  return FeatureVector{
      static_cast<double>(ncd.queue_total()),
      static_cast<double>(doc.queue_outpatient),
      static_cast<double>(doc.queue_inpatient),
      static_cast<double>(doc.queue_childbirth),
      static_cast<double>(lab.queue_total()),
      static_cast<double>(phar.queue_total()),
      aqt::workstation_remaining(ncd, single(params.ncd)),
      aqt::workstation_remaining(doc, doctor_dist),
      aqt::workstation_remaining(lab, single(params.lab)),
      aqt::workstation_remaining(phar, single(params.pharmacy)),
      at_arrival.ncd.queue_len,
      at_arrival.doctor.queue_o,
      at_arrival.doctor.queue_h,
      at_arrival.lab.queue_len,
      at_arrival.pharmacy.queue_len,
      at_arrival.ncd.remaining,
      at_arrival.doctor.remaining,
      at_arrival.lab.remaining,
      at_arrival.pharmacy.remaining,
      travel,
      via_ncd ? 1.0 : 0.0,
  };
}

inline FeatureVector extract_features(const phc::FacilityState& state, const aqt::AqtParams& params, double travel,
                                      bool via_ncd) {
  return extract_features(state, params, aqt::predict(state, params, travel, via_ncd), travel, via_ncd);
}

}  // namespace rtlos::simml
