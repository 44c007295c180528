#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "rtlos/error.hpp"
#include "rtlos/experiments/scenario.hpp"
#include "rtlos/experiments/stats.hpp"
#include "rtlos/rthfa/assign.hpp"
#include "rtlos/rthfa/calibration.hpp"
#include "rtlos/rthfa/predictors.hpp"
#include "rtlos/simml/dataset.hpp"
#include "rtlos/simml/features.hpp"
#include "rtlos/simml/knn.hpp"

namespace rtlos::experiments {

// Seed offsets keeping the auxiliary runs off the replication seeds
// (seed + index).
inline constexpr std::uint64_t kTrainSeedOffset = 1'000'003;
inline constexpr std::uint64_t kCalibrationSeedOffset = 2'000'003;

inline std::unique_ptr<rthfa::LosPredictor> make_predictor(rthfa::PredictorKind kind,
                                                           std::shared_ptr<const simml::KnnRegressor> model) {
  switch (kind) {
    case rthfa::PredictorKind::Actual: return std::make_unique<rthfa::ActualLosOracle>();
    case rthfa::PredictorKind::Aqt: return std::make_unique<rthfa::AqtLosPredictor>();
    case rthfa::PredictorKind::SimMl: return std::make_unique<rthfa::KnnLosPredictor>(std::move(model));
  }
  throw ConfigError("unknown predictor");
}

// Runs `count` independent jobs on up to `jobs` threads. Results land at
// their index, so the outcome does not depend on scheduling. The first
// failure (lowest index) is rethrown with the index attached.
template <class Result, class Fn>
std::vector<Result> run_indexed(int count, int jobs, Fn&& fn) {
  std::vector<Result> results(static_cast<std::size_t>(count));
  std::vector<std::string> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        results[static_cast<std::size_t>(i)] = fn(i);
      } catch (const std::exception& e) {
        errors[static_cast<std::size_t>(i)] = e.what();
      }
    }
  };
  const int threads = std::max(1, std::min(jobs, count));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (int i = 0; i < count; ++i)
    if (!errors[static_cast<std::size_t>(i)].empty())
      throw SimulationError("replication " + std::to_string(i) + " failed: " + errors[static_cast<std::size_t>(i)]);
  return results;
}

// ---- Sim-ML data ------------------------------------------------------------

struct DatasetOptions {
  int replications = 2;
  double days = 180.0;
  double warmup_days = 30.0;
  std::uint64_t seed = 1;
  // Drive the runs with RT-HFA (AQT predictor, scenario compliance) so that
  // both facilities are seen at both travel times; otherwise baseline routing.
  bool assign = true;
};

// One sample per outpatient arriving after warm-up: features of the facility
// they visit, observed at decision time, and the realized LOS.
inline simml::Dataset generate_dataset(const ScenarioConfig& cfg, const DatasetOptions& opt) {
  auto one = [&](int r) {
    phc::Network net(cfg.facilities, cfg.travel, opt.seed + static_cast<std::uint64_t>(r));
    rthfa::AqtLosPredictor aqt;
    auto inner = opt.assign ? rthfa::make_decider(aqt, cfg.compliance) : phc::Decider{};
    std::unordered_map<std::uint64_t, simml::Sample> pending;
    net.set_decider([&](phc::Network& n, const phc::OutpatientSeed& seed) {
      const int visited = inner ? inner(n, seed) : seed.origin;
      const auto& f = n.facility(visited);
      const auto state = f.observe();
      const auto params = aqt::AqtParams::from(f.config());
      const double travel = n.travel()(seed.origin, visited);
      const bool via_ncd = rthfa::routed_via_ncd(seed, f.config());
      const bool lab = seed.lab_draw < f.config().lab_visit_prob;
      simml::Sample s;
      s.features = simml::extract_features(state, params, aqt::predict(state, params, travel, via_ncd), travel, via_ncd);
      const auto realized = aqt::predict(state, params, travel, via_ncd, lab ? 1.0 : 0.0);
      s.meta.replication = r;
      s.meta.patient_id = seed.id;
      s.meta.facility = visited;
      s.meta.flow_case = static_cast<int>(phc::flow_case(via_ncd, lab));
      s.meta.aqt_station = {via_ncd ? realized.ncd.los : simml::kNoValue, realized.doctor.los,
                            lab ? realized.lab.los : simml::kNoValue, realized.pharmacy.los};
      s.meta.aqt_total = realized.los.total;
      pending.emplace(seed.id, s);
      return visited;
    });
    const double warmup = opt.warmup_days * phc::kMinutesPerDay;
    net.start(opt.days * phc::kMinutesPerDay, warmup);
    net.finish();
    simml::Dataset out;
    for (const auto& p : net.completed()) {
      if (p.arrival < warmup) continue;
      auto s = pending.at(p.id);
      s.label = p.los();
      s.meta.arrival = p.arrival;
      for (auto st : phc::kStations)
        if (p.at(st).visited()) s.meta.sojourn[phc::index_of(st)] = p.at(st).sojourn();
      out.push_back(s);
    }
    return out;
  };
  simml::Dataset all;
  for (int r = 0; r < opt.replications; ++r) {
    auto part = one(r);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

inline DatasetOptions training_options(const ScenarioConfig& cfg) {
  DatasetOptions o;
  o.replications = cfg.train_replications;
  o.days = cfg.train_days;
  o.warmup_days = cfg.train_warmup_days;
  o.seed = cfg.seed + kTrainSeedOffset;
  return o;
}

// Global model used at assignment time: IQR-filtered samples, all routing
// cases together (via_ncd is a feature), at most `max_samples` of them drawn
// by a seeded shuffle.
inline std::shared_ptr<const simml::KnnRegressor> train_knn(const simml::Dataset& data, int k,
                                                            std::size_t max_samples = 0, std::uint64_t seed = 0) {
  auto kept = simml::iqr_filter(data);
  if (max_samples > 0 && kept.size() > max_samples) {
    const double fraction = static_cast<double>(max_samples) / static_cast<double>(kept.size());
    if (fraction < 1.0) kept = simml::train_test_split(kept, fraction, seed).first;
  }
  std::vector<double> rows, labels;
  rows.reserve(kept.size() * simml::kFeatureCount);
  for (const auto& s : kept) {
    rows.insert(rows.end(), s.features.begin(), s.features.end());
    labels.push_back(s.label);
  }
  auto model = std::make_shared<simml::KnnRegressor>();
  model->fit(std::move(rows), std::move(labels), simml::kFeatureCount, k);
  return model;
}

// Predictor accuracy on a held-out split. Flow-wise: one KNN per routing case
// on total LOS. Station-wise: one KNN per station on the station sojourn. AQT
// is scored on the same test rows with the realized lab routing.
struct AccuracyRow {
  std::string stratum;
  std::size_t train = 0;
  std::size_t test = 0;
  std::optional<double> knn;
  std::optional<double> aqt;
};

struct AccuracyReport {
  std::vector<AccuracyRow> flow;
  std::vector<AccuracyRow> station;
};

inline AccuracyReport train_eval(const simml::Dataset& data, int k, std::uint64_t seed, double train_fraction = 0.75) {
  const auto kept = simml::iqr_filter(data);
  const auto [train, test] = simml::train_test_split(kept, train_fraction, seed);
  AccuracyReport report;

  auto evaluate = [&](const std::string& name, auto select, auto label_of, auto aqt_of) {
    AccuracyRow row;
    row.stratum = name;
    std::vector<double> rows, labels;
    for (const auto& s : train) {
      if (!select(s)) continue;
      rows.insert(rows.end(), s.features.begin(), s.features.end());
      labels.push_back(label_of(s));
    }
    row.train = labels.size();
    std::vector<double> actual, knn_pred, aqt_pred;
    simml::KnnRegressor model;
    const bool fit = labels.size() >= static_cast<std::size_t>(k);
    if (fit) model.fit(std::move(rows), std::move(labels), simml::kFeatureCount, k);
    for (const auto& s : test) {
      if (!select(s) || !(label_of(s) > 0.0)) continue;
      actual.push_back(label_of(s));
      if (fit) knn_pred.push_back(model.predict(s.features.data()));
      aqt_pred.push_back(aqt_of(s));
    }
    row.test = actual.size();
    if (!actual.empty()) {
      if (fit) row.knn = simml::mape(actual, knn_pred);
      row.aqt = simml::mape(actual, aqt_pred);
    }
    return row;
  };

  for (int c = 1; c <= 4; ++c) {
    report.flow.push_back(evaluate(
        "case" + std::to_string(c), [c](const simml::Sample& s) { return s.meta.flow_case == c; },
        [](const simml::Sample& s) { return s.label; }, [](const simml::Sample& s) { return s.meta.aqt_total; }));
  }
  for (auto st : phc::kStations) {
    const auto i = phc::index_of(st);
    report.station.push_back(evaluate(
        std::string(phc::name_of(st)), [i](const simml::Sample& s) { return !std::isnan(s.meta.sojourn[i]); },
        [i](const simml::Sample& s) { return s.meta.sojourn[i]; },
        [i](const simml::Sample& s) { return s.meta.aqt_station[i]; }));
  }
  return report;
}

// ---- Scenario runs ------------------------------------------------------------

// What a scenario computes once before its replications.
struct Prepared {
  std::vector<phc::FacilityConfig> facilities;  // with calibrated predictor lambdas
  std::shared_ptr<const simml::KnnRegressor> model;
  std::optional<rthfa::LambdaCalibration> calibration;
  std::size_t training_samples = 0;
};

inline rthfa::LambdaCalibration calibrate(const ScenarioConfig& cfg, rthfa::LosPredictor& predictor) {
  phc::Network net(cfg.facilities, cfg.travel, cfg.seed + kCalibrationSeedOffset);
  net.set_decider(rthfa::make_decider(predictor, cfg.compliance));
  rthfa::CalibrationOptions opt;
  opt.window_days = cfg.t0_days;
  opt.epsilon = cfg.epsilon;
  opt.max_windows = cfg.max_windows;
  opt.relaxation = cfg.relaxation;
  return rthfa::effective_lambda(net, opt);
}

inline Prepared prepare(const ScenarioConfig& cfg, std::shared_ptr<const simml::KnnRegressor> model = nullptr) {
  cfg.validate();
  Prepared p;
  p.facilities = cfg.facilities;
  if (!cfg.predictor) return p;
  if (*cfg.predictor == rthfa::PredictorKind::SimMl) {
    if (!model) {
      const auto data = generate_dataset(cfg, training_options(cfg));
      p.training_samples = data.size();
      model = train_knn(data, cfg.knn_k, static_cast<std::size_t>(cfg.train_max_samples), cfg.seed);
    }
    p.model = model;
  }
  if (cfg.calibrate && *cfg.predictor != rthfa::PredictorKind::Actual) {
    auto predictor = make_predictor(*cfg.predictor, p.model);
    p.calibration = calibrate(cfg, *predictor);
    for (std::size_t f = 0; f < p.facilities.size(); ++f)
      p.facilities[f].predictor_interarrival = p.calibration->lambda_eff[f];
  }
  return p;
}

struct ReplicationRun {
  ReplicationOutcome outcome;
  std::vector<rthfa::AssignmentDecision> decisions;  // after warm-up
};

inline ReplicationRun run_replication(const ScenarioConfig& cfg, const Prepared& prep, int index) {
  phc::Network net(prep.facilities, cfg.travel, cfg.seed + static_cast<std::uint64_t>(index));
  ReplicationRun run;
  std::unique_ptr<rthfa::LosPredictor> predictor;
  const double warmup = cfg.warmup();
  if (cfg.predictor) {
    predictor = make_predictor(*cfg.predictor, prep.model);
    net.set_decider(rthfa::make_decider(
        *predictor, cfg.compliance,
        [&run, warmup](const phc::Network&, const phc::OutpatientSeed& seed, const rthfa::AssignmentDecision& d) {
          if (seed.decided_at >= warmup) run.decisions.push_back(d);
        }));
  }
  net.start(cfg.horizon(), warmup);
  net.finish();
  run.outcome = measure(net, warmup, cfg.horizon(), run.decisions, index);
  return run;
}

struct ScenarioResult {
  Prepared prepared;
  std::vector<ReplicationOutcome> outcomes;
  Summary summary;
  std::vector<rthfa::AssignmentDecision> audit;  // decisions of replication 0
};

inline ScenarioResult run_scenario(const ScenarioConfig& cfg, int jobs = 1,
                                   std::shared_ptr<const simml::KnnRegressor> model = nullptr) {
  ScenarioResult result;
  result.prepared = prepare(cfg, std::move(model));
  auto runs = run_indexed<ReplicationRun>(cfg.replications, jobs,
                                          [&](int i) { return run_replication(cfg, result.prepared, i); });
  for (auto& r : runs) result.outcomes.push_back(r.outcome);
  result.audit = std::move(runs.front().decisions);
  result.summary = summarize(result.outcomes);
  return result;
}

struct SweepPoint {
  double compliance = 0.0;
  ScenarioResult result;
};

// Same scenario at each compliance rate. The Sim-ML model is trained once;
// calibration is redone per rate since the effective arrival rate depends on
// it.
inline std::vector<SweepPoint> compliance_sweep(const ScenarioConfig& cfg, const std::vector<double>& rates,
                                                int jobs = 1) {
  std::shared_ptr<const simml::KnnRegressor> model;
  if (cfg.predictor == rthfa::PredictorKind::SimMl) model = train_knn(generate_dataset(cfg, training_options(cfg)), cfg.knn_k,
                       static_cast<std::size_t>(cfg.train_max_samples), cfg.seed);
  std::vector<SweepPoint> out;
  for (double rate : rates) {
    auto c = cfg;
    c.compliance = rate;
    out.push_back({rate, run_scenario(c, jobs, model)});
  }
  return out;
}

}  // namespace rtlos::experiments
