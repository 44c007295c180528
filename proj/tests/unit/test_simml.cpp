#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "helpers.hpp"
#include "rtlos/experiments/runner.hpp"
#include "rtlos/simml/dataset.hpp"
#include "rtlos/simml/features.hpp"
#include "rtlos/simml/knn.hpp"
#include "rtlos/simml/metrics.hpp"

using namespace rtlos;
using namespace rtlos::simml;
using phc::StationId;

namespace {

std::size_t feature(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    if (kFeatureNames[i] == name) return i;
  throw std::out_of_range(std::string(name));
}

KnnRegressor fit1d(std::vector<double> x, std::vector<double> y, int k) {
  KnnRegressor m;
  m.fit(std::move(x), std::move(y), 1, k);
  return m;
}

experiments::ScenarioConfig one_facility(const phc::FacilityConfig& cfg, double travel) {
  experiments::ScenarioConfig s;
  s.facilities = {cfg};
  s.travel = phc::TravelMatrix::uniform(1, travel, travel);
  return s;
}

experiments::DatasetOptions days(double total, double warmup, int reps = 1, bool assign = false) {
  experiments::DatasetOptions o;
  o.days = total;
  o.warmup_days = warmup;
  o.replications = reps;
  o.assign = assign;
  return o;
}

}  // namespace

TEST(Features, EmptyFacilityAtZeroLookahead) {
  const auto f = extract_features(phc::empty_facility_state(), aqt::AqtParams{}, 0.0, false);
  for (std::size_t i = 0; i < kFeatureCount; ++i) EXPECT_EQ(f[i], 0.0) << kFeatureNames[i];
}

TEST(Features, EmptyFacilityPassesTravelThrough) {
  const auto f = extract_features(phc::empty_facility_state(), aqt::AqtParams{}, 15.0, true);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(f[i], 0.0) << kFeatureNames[i];
  EXPECT_EQ(f[feature("travel_min")], 15.0);
  EXPECT_EQ(f[feature("age_ge30")], 1.0);
  for (double v : f) EXPECT_TRUE(std::isfinite(v) && v >= 0.0);
}

TEST(Features, DoctorClassCountsAtTheirSchemaPositions) {
  auto st = phc::empty_facility_state();
  st[StationId::Doctor].queue_outpatient = 2;
  st[StationId::Doctor].queue_inpatient = 1;
  st[StationId::Doctor].servers[0] = {true, 0.3, phc::PatientClass::Outpatient};
  const auto f = extract_features(st, aqt::AqtParams{}, 0.0, false);
  EXPECT_EQ(feature("q_doc_op_t"), 1u);
  EXPECT_EQ(f[1], 2.0);
  EXPECT_EQ(f[2], 1.0);
  EXPECT_EQ(f[3], 0.0);
  EXPECT_DOUBLE_EQ(f[feature("w_doc_t")], 0.87 - 0.3);
}

TEST(Dataset, CsvRoundTrip) {
  Dataset data(3);
  for (std::size_t r = 0; r < data.size(); ++r) {
    auto& s = data[r];
    for (std::size_t i = 0; i < kFeatureCount; ++i) s.features[i] = 0.1 * static_cast<double>(i) + 1.0 / 3.0 * r;
    s.label = 12.345678901234567 + r;
    s.meta.replication = static_cast<int>(r);
    s.meta.patient_id = 1000 + r;
    s.meta.facility = 1;
    s.meta.flow_case = 2;
    s.meta.arrival = 777.25;
    s.meta.sojourn = {3.5, 1.0 / 7.0, kNoValue, 2.0};
    s.meta.aqt_total = 9.5;
  }
  std::stringstream io;
  write_csv(io, data);
  const auto back = read_csv(io);
  ASSERT_EQ(back.size(), data.size());
  for (std::size_t r = 0; r < data.size(); ++r) {
    EXPECT_EQ(back[r].features, data[r].features);
    EXPECT_EQ(back[r].label, data[r].label);
    EXPECT_EQ(back[r].meta.patient_id, data[r].meta.patient_id);
    EXPECT_EQ(back[r].meta.sojourn[1], data[r].meta.sojourn[1]);
    EXPECT_TRUE(std::isnan(back[r].meta.sojourn[2]));
    EXPECT_TRUE(std::isnan(back[r].meta.aqt_station[0]));
    EXPECT_EQ(back[r].meta.aqt_total, 9.5);
  }
}

TEST(Dataset, HeaderNamesEveryFeatureAndTheLabel) {
  std::ostringstream out;
  write_csv_header(out);
  const auto text = out.str();
  for (auto name : kFeatureNames) EXPECT_NE(text.find(std::string(name) + ","), std::string::npos) << name;
  EXPECT_NE(text.find("label_los_min"), std::string::npos);
}

TEST(Dataset, RejectsForeignFiles) {
  std::istringstream no_schema("a,b,c\n1,2,3\n");
  EXPECT_THROW(read_csv(no_schema), ConfigError);
  std::stringstream bad;
  write_csv_header(bad);
  bad << "1,2,3\n";
  EXPECT_THROW(read_csv(bad), ConfigError);
}

// Each day is a Poisson count with mean 480/9 = 53.3; the mean over 40 days
// must lie within three standard errors.
TEST(GenerateDataset, AboutFiftyThreeSamplesPerDay) {
  auto cfg = test::quiet_config(9.0);
  const auto scenario = one_facility(cfg, 15.0);
  const int reps = 40;
  const auto data = experiments::generate_dataset(scenario, days(1.0, 0.0, reps));
  std::vector<int> per(reps, 0);
  for (const auto& s : data) ++per[static_cast<std::size_t>(s.meta.replication)];
  const double mean = static_cast<double>(data.size()) / reps;
  EXPECT_NEAR(mean, 480.0 / 9.0, 3.0 * std::sqrt(480.0 / 9.0 / reps));
  for (int n : per) {
    EXPECT_GE(n, 25);
    EXPECT_LE(n, 85);
  }
}

TEST(GenerateDataset, WarmupPatientsAreExcluded) {
  const auto data = experiments::generate_dataset(experiments::default_scenario(), days(3.0, 1.0, 1, true));
  ASSERT_FALSE(data.empty());
  for (const auto& s : data) EXPECT_GE(s.meta.arrival, phc::kMinutesPerDay);
}

// One outpatient per day at minute 300, constant services: the label is the
// hand-traced route length.
TEST(GenerateDataset, LabelIsExitMinusArrival) {
  auto cfg = test::constant_config();
  cfg.outpatient_interarrival = sim::Constant{300.0};
  const auto data = experiments::generate_dataset(one_facility(cfg, 15.0), days(4.0, 0.0));
  ASSERT_EQ(data.size(), 4u);
  for (const auto& s : data) {
    const bool ncd = s.features[feature("age_ge30")] == 1.0;
    const bool lab = s.meta.flow_case == 2 || s.meta.flow_case == 3;
    EXPECT_DOUBLE_EQ(std::fmod(s.meta.arrival, phc::kMinutesPerDay), 315.0);
    EXPECT_DOUBLE_EQ(s.label, (ncd ? 3.0 : 0.0) + 1.0 + (lab ? 4.0 : 0.0) + 2.0);
    double sum = 0.0;
    for (double v : s.meta.sojourn)
      if (!std::isnan(v)) sum += v;
    EXPECT_DOUBLE_EQ(s.label, sum);
    EXPECT_GT(s.label, 0.0);
  }
}

TEST(IqrFilter, DropsTheFarOutlier) {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  v.push_back(10000.0);
  const auto kept = iqr_filter(v, [](double x) { return x; });
  EXPECT_EQ(kept.size(), 100u);
  EXPECT_EQ(*std::max_element(kept.begin(), kept.end()), 100.0);
}

TEST(IqrFilter, UniformLabelsAreKept) {
  std::vector<double> v(50, 7.0);
  EXPECT_EQ(iqr_filter(v, [](double x) { return x; }).size(), 50u);
  std::vector<double> u(200);
  std::iota(u.begin(), u.end(), 0.0);
  EXPECT_EQ(iqr_filter(u, [](double x) { return x; }).size(), 200u);
}

TEST(IqrFilter, EmptyIsAnError) {
  EXPECT_THROW(iqr_filter(Dataset{}), std::invalid_argument);
}

TEST(Split, SeventyFiveTwentyFive) {
  std::vector<int> rows(100);
  std::iota(rows.begin(), rows.end(), 0);
  const auto [train, test] = train_test_split(rows, 0.75, 9);
  EXPECT_EQ(train.size(), 75u);
  EXPECT_EQ(test.size(), 25u);
  std::set<int> all(train.begin(), train.end());
  all.insert(test.begin(), test.end());
  EXPECT_EQ(all.size(), 100u);
}

TEST(Split, SameSeedSameMembership) {
  std::vector<int> rows(500);
  std::iota(rows.begin(), rows.end(), 0);
  EXPECT_EQ(train_test_split(rows, 0.75, 3), train_test_split(rows, 0.75, 3));
  EXPECT_NE(train_test_split(rows, 0.75, 3).first, train_test_split(rows, 0.75, 4).first);
}

TEST(Knn, HandExamples) {
  const auto m1 = fit1d({0.0, 10.0}, {0.0, 100.0}, 1);
  EXPECT_EQ(m1.predict(std::vector<double>{1.0}), 0.0);
  const auto m2 = fit1d({0.0, 10.0}, {0.0, 100.0}, 2);
  EXPECT_EQ(m2.predict(std::vector<double>{5.0}), 50.0);
  const auto tie = fit1d({0.0, 10.0, 100.0}, {4.0, 6.0, 1000.0}, 2);
  EXPECT_EQ(tie.predict(std::vector<double>{5.0}), 5.0);
}

TEST(Knn, TrainingPointReturnsItsOwnLabel) {
  KnnRegressor m;
  m.fit({0, 0, 1, 2, 3, 1, 5, 5}, {10, 20, 30, 40}, 2, 1);
  EXPECT_EQ(m.predict(std::vector<double>{3, 1}), 30.0);
  EXPECT_EQ(m.predict(std::vector<double>{5, 5}), 40.0);
}

TEST(Knn, DistanceTiesGoToTheLowerRow) {
  const auto m = fit1d({1.0, 3.0, 3.0, 1.0}, {10.0, 20.0, 30.0, 40.0}, 1);
  EXPECT_EQ(m.predict(std::vector<double>{2.0}), 10.0);
  EXPECT_EQ(m.neighbors(std::vector<double>{3.0}.data())[0].index, 1u);
}

TEST(Knn, ConstantColumnScalesToZero) {
  KnnRegressor m;
  m.fit({7, 0, 7, 10}, {1, 2}, 2, 1);
  EXPECT_EQ(m.predict(std::vector<double>{-500, 9}), 2.0);
}

TEST(Knn, InvalidFits) {
  KnnRegressor m;
  EXPECT_THROW(m.fit({1, 2}, {1, 2}, 1, 3), std::invalid_argument);
  EXPECT_THROW(m.fit({1, 2}, {1, 2}, 1, 0), std::invalid_argument);
  EXPECT_THROW(m.fit({1, 2, 3}, {1, 2}, 1, 1), std::invalid_argument);
}

TEST(Knn, TreeSearchEqualsExhaustiveScan) {
  sim::Xoshiro256 rng(17);
  const std::size_t dims = 6, n = 3000;
  std::vector<double> rows(n * dims), labels(n);
  for (std::size_t i = 0; i < rows.size(); ++i)
    rows[i] = i % dims < 3 ? std::floor(rng.uniform01() * 5.0) : rng.uniform01() * 40.0;
  for (auto& y : labels) y = 1.0 + rng.uniform01() * 50.0;
  for (int k : {1, 2, 5}) {
    KnnRegressor m;
    m.fit(rows, labels, dims, k);
    for (int q = 0; q < 1000; ++q) {
      std::vector<double> query(dims);
      for (std::size_t d = 0; d < dims; ++d)
        query[d] = d < 3 ? std::floor(rng.uniform01() * 5.0) : rng.uniform01() * 40.0;
      const auto a = m.neighbors(query.data());
      const auto b = m.exhaustive(query.data());
      ASSERT_EQ(a.size(), b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_EQ(a[i].index, b[i].index) << "k=" << k << " query " << q;
        ASSERT_EQ(a[i].distance, b[i].distance);
      }
      ASSERT_EQ(m.predict(query), m.predict_exhaustive(query));
    }
  }
}

TEST(Knn, ScalingInvariance) {
  sim::Xoshiro256 rng(5);
  const std::size_t dims = 3, n = 400;
  std::vector<double> rows(n * dims), labels(n);
  for (auto& v : rows) v = rng.uniform01() * 10.0;
  for (auto& y : labels) y = rng.uniform01() * 10.0 + 1.0;
  auto scaled = rows;
  // Powers of two keep the scaled coordinates bit-identical.
  for (std::size_t r = 0; r < n; ++r) scaled[r * dims + 1] *= 8.0;
  KnnRegressor a, b;
  a.fit(rows, labels, dims, 2);
  b.fit(scaled, labels, dims, 2);
  for (int q = 0; q < 200; ++q) {
    std::vector<double> x{rng.uniform01() * 10.0, rng.uniform01() * 10.0, rng.uniform01() * 10.0};
    auto y = x;
    y[1] *= 8.0;
    EXPECT_EQ(a.predict(x), b.predict(y));
  }
}

TEST(Knn, SaveLoadRoundTrip) {
  sim::Xoshiro256 rng(8);
  std::vector<double> rows(200 * 4), labels(200);
  for (auto& v : rows) v = rng.uniform01() * 3.0;
  for (auto& y : labels) y = rng.uniform01();
  KnnRegressor m;
  m.fit(rows, labels, 4, 2);
  std::stringstream io;
  m.save(io);
  const auto back = KnnRegressor::load(io);
  EXPECT_EQ(back.k(), 2);
  EXPECT_EQ(back.size(), 200u);
  for (int q = 0; q < 100; ++q) {
    std::vector<double> x{rng.uniform01() * 3, rng.uniform01() * 3, rng.uniform01() * 3, rng.uniform01() * 3};
    EXPECT_EQ(m.predict(x), back.predict(x));
  }
  std::istringstream junk("not a model");
  EXPECT_THROW(KnnRegressor::load(junk), ConfigError);
}

TEST(Mape, HandExamples) {
  EXPECT_DOUBLE_EQ(mape({10, 20}, {9, 22}), 10.0);
  EXPECT_EQ(mape({3, 4, 5}, {3, 4, 5}), 0.0);
  EXPECT_NEAR(mape({58.492}, {8.582}), 85.33, 0.005);
}

TEST(Mape, Errors) {
  EXPECT_THROW(mape({0.0, 1.0}, {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(mape({1.0}, {1.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(mape({}, {}), std::invalid_argument);
}

TEST(Mape, PositiveUnlessExact) {
  EXPECT_GT(mape({1, 2, 3}, {1, 2, 3.0001}), 0.0);
}

TEST(StratifiedMape, EmptyStrataAreAbsent) {
  StratifiedMape m;
  m.add(1, 12.0, 12.0);
  EXPECT_EQ(m.value(1), 0.0);
  EXPECT_FALSE(m.value(2).has_value());
  EXPECT_FALSE(m.value(3).has_value());
  EXPECT_EQ(m.count(1), 1u);
  EXPECT_EQ(m.count(3), 0u);
}

TEST(TrainEval, ReportsEveryStratum) {
  auto scenario = experiments::default_scenario();
  const auto data = experiments::generate_dataset(scenario, days(8.0, 1.0));
  const auto report = experiments::train_eval(data, 2, 3);
  ASSERT_EQ(report.flow.size(), 4u);
  ASSERT_EQ(report.station.size(), 4u);
  for (const auto& rows : {report.flow, report.station})
    for (const auto& row : rows) {
      ASSERT_TRUE(row.knn.has_value()) << row.stratum;
      ASSERT_TRUE(row.aqt.has_value()) << row.stratum;
      EXPECT_TRUE(std::isfinite(*row.knn) && *row.knn >= 0.0);
      EXPECT_TRUE(std::isfinite(*row.aqt) && *row.aqt >= 0.0);
    }
  std::size_t total = 0;
  for (const auto& row : report.flow) total += row.train + row.test;
  EXPECT_EQ(total, iqr_filter(data).size());
}
