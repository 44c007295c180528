#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rtlos/aqt/predictor.hpp"
#include "rtlos/error.hpp"
#include "rtlos/phc/network.hpp"
#include "rtlos/phc/routing.hpp"
#include "rtlos/simml/features.hpp"
#include "rtlos/simml/knn.hpp"

namespace rtlos::rthfa {

enum class PredictorKind { Actual, Aqt, SimMl };

inline std::string to_string(PredictorKind k) {
  switch (k) {
    case PredictorKind::Actual: return "actual";
    case PredictorKind::Aqt: return "aqt";
    case PredictorKind::SimMl: return "simml";
  }
  return "?";
}

inline PredictorKind parse_predictor(const std::string& s) {
  if (s == "actual") return PredictorKind::Actual;
  if (s == "aqt") return PredictorKind::Aqt;
  if (s == "simml") return PredictorKind::SimMl;
  throw ConfigError("unknown predictor '" + s + "' (expected actual, aqt or simml)");
}

inline bool routed_via_ncd(const phc::OutpatientSeed& seed, const phc::FacilityConfig& cfg) {
  return seed.age >= cfg.ncd_age_threshold;
}

// Expected LOS at facility `j` for an outpatient deciding now who would arrive
// after `travel` minutes. The network is advanced to the decision instant.
class LosPredictor {
 public:
  virtual ~LosPredictor() = default;
  virtual double predict(const phc::Network& net, int j, const phc::OutpatientSeed& seed, double travel) = 0;
};

// Clairvoyant LOS: a copy of facility j admits the patient and runs forward
// until the patient leaves. Service draws come from the patient's own seed and
// the facility's priority arrivals from its copied streams, so the copy sees
// exactly what the real run will, apart from outpatients who decide later.
class ActualLosOracle : public LosPredictor {
 public:
  static constexpr double kGuardMinutes = 10.0 * phc::kMinutesPerDay;

  static double realize(const phc::Facility& facility, const phc::Patient& patient) {
    auto copy = facility.clone();
    const double limit = copy.now() + kGuardMinutes;
    copy.admit(patient);
    while (copy.has_patient(patient.id)) {
      if (!copy.step()) throw SimulationError("oracle copy ran out of events before the patient left");
      if (copy.now() > limit) throw SimulationError("oracle copy exceeded the 10-day guard");
    }
    for (const auto& p : copy.completed())
      if (p.id == patient.id) return p.los();
    throw SimulationError("oracle patient left without a record");
  }

  double predict(const phc::Network& net, int j, const phc::OutpatientSeed& seed, double travel) override {
    const auto& f = net.facility(j);
    return realize(f, phc::materialize(seed, j, travel, f.config()));
  }
};

class AqtLosPredictor : public LosPredictor {
 public:
  explicit AqtLosPredictor(aqt::AqtOptions options = {}) : options_(options) {}

  double predict(const phc::Network& net, int j, const phc::OutpatientSeed& seed, double travel) override {
    const auto& f = net.facility(j);
    const auto params = aqt::AqtParams::from(f.config());
    return aqt::predict(f.observe(), params, travel, routed_via_ncd(seed, f.config()), 0.5, options_).los.total;
  }

 private:
  aqt::AqtOptions options_;
};

class KnnLosPredictor : public LosPredictor {
 public:
  explicit KnnLosPredictor(std::shared_ptr<const simml::KnnRegressor> model) : model_(std::move(model)) {
    if (!model_ || !model_->fitted()) throw ConfigError("Sim-ML predictor needs a fitted model");
    if (model_->dims() != simml::kFeatureCount) throw ConfigError("Sim-ML model does not match the feature schema");
  }

  double predict(const phc::Network& net, int j, const phc::OutpatientSeed& seed, double travel) override {
    const auto& f = net.facility(j);
    const auto params = aqt::AqtParams::from(f.config());
    const auto x = simml::extract_features(f.observe(), params, travel, routed_via_ncd(seed, f.config()));
    return model_->predict(x.data());
  }

 private:
  std::shared_ptr<const simml::KnnRegressor> model_;
};

}  // namespace rtlos::rthfa
