#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <map>
#include <sstream>
#include <vector>

#include "helpers.hpp"
#include "rtlos/aqt/predictor.hpp"
#include "rtlos/phc/network.hpp"
#include "rtlos/rthfa/assign.hpp"
#include "rtlos/rthfa/calibration.hpp"
#include "rtlos/rthfa/predictors.hpp"

using namespace rtlos;
using namespace rtlos::rthfa;
using phc::PatientClass;
using phc::StationId;

namespace {

Candidate cand(int j, double travel, double los) {
  Candidate c;
  c.facility = j;
  c.travel = travel;
  c.predicted = los;
  c.score = travel + los;
  return c;
}

// Predictor with fixed per-facility values, for driving assign().
class FixedPredictor : public LosPredictor {
 public:
  explicit FixedPredictor(std::vector<double> los) : los_(std::move(los)) {}
  double predict(const phc::Network&, int j, const phc::OutpatientSeed&, double) override {
    const double v = los_.at(static_cast<std::size_t>(j));
    if (v < 0.0) throw std::runtime_error("no prediction");
    return v;
  }

 private:
  std::vector<double> los_;
};

phc::Network two_phcs(double ia1, double ia2, std::uint64_t seed, double near = 15.0, double far = 30.0) {
  phc::FacilityConfig a;
  a.outpatient_interarrival = sim::Exponential{ia1};
  auto b = a;
  b.outpatient_interarrival = sim::Exponential{ia2};
  return phc::Network({a, b}, phc::TravelMatrix::uniform(2, near, far), seed);
}

phc::OutpatientSeed seed_at(std::uint64_t id, int origin, double t, double age, double lab_draw) {
  phc::OutpatientSeed s;
  s.id = id;
  s.origin = origin;
  s.decided_at = t;
  s.age = age;
  s.lab_draw = lab_draw;
  s.service_seed = 99;
  return s;
}

}  // namespace

TEST(Choose, HandExample) {
  EXPECT_EQ(choose({cand(0, 10, 20), cand(1, 20, 5)}, 0), 1);
}

TEST(Choose, TiesGoToTheLowerIndex) {
  EXPECT_EQ(choose({cand(0, 15, 10), cand(1, 15, 10)}, 1), 0);
  EXPECT_EQ(choose({cand(0, 15, 11), cand(1, 16, 10), cand(2, 10, 16)}, 2), 0);
}

TEST(Choose, SingleCandidate) {
  EXPECT_EQ(choose({cand(0, 1000, 1e6)}, 0), 0);
}

TEST(Choose, InvariantUnderACommonShift) {
  sim::Xoshiro256 rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Candidate> c;
    for (int j = 0; j < 4; ++j) c.push_back(cand(j, std::floor(rng.uniform01() * 4) * 15, std::floor(rng.uniform01() * 8)));
    const int base = choose(c, 0);
    for (auto& x : c) x.score += 37.0;
    ASSERT_EQ(choose(c, 0), base);
  }
}

TEST(Choose, FailedCandidatesAreSkippedAndAllFailingFallsBackToNearest) {
  auto c = std::vector<Candidate>{cand(0, 15, 1), cand(1, 30, 50)};
  c[0].ok = false;
  bool fallback = true;
  EXPECT_EQ(choose(c, 0, &fallback), 1);
  EXPECT_FALSE(fallback);
  c[1].ok = false;
  EXPECT_EQ(choose(c, 1, &fallback), 0);
  EXPECT_TRUE(fallback);
}

TEST(Comply, ExtremeRates) {
  sim::Xoshiro256 rng(1);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_TRUE(comply(1.0, rng));
    ASSERT_FALSE(comply(0.0, rng));
  }
}

TEST(Comply, BinomialConcentration) {
  sim::Xoshiro256 rng(12);
  int yes = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) yes += comply(0.75, rng);
  EXPECT_NEAR(static_cast<double>(yes) / n, 0.75, 0.005);
}

TEST(Assign, VisitsTheChoiceOnlyWhenComplying) {
  auto net = two_phcs(9, 2, 1);
  FixedPredictor pred({20.0, 4.0});
  sim::Xoshiro256 rng(2);
  const auto s = seed_at(1, 0, 0.0, 40, 0.9);
  const auto yes = assign(net, s, pred, 1.0, rng);
  EXPECT_DOUBLE_EQ(yes.candidates[0].score, 35.0);
  EXPECT_DOUBLE_EQ(yes.candidates[1].score, 34.0);
  EXPECT_EQ(yes.chosen, 1);
  EXPECT_TRUE(yes.complied);
  EXPECT_EQ(yes.visited, 1);
  // 15 + 20 against 30 + 5: a tie, resolved to the lower index.
  FixedPredictor tied({20.0, 5.0});
  EXPECT_EQ(assign(net, s, tied, 1.0, rng).chosen, 0);
}

TEST(Assign, PredictorFailureExcludesTheFacility) {
  auto net = two_phcs(9, 2, 1);
  FixedPredictor pred({-1.0, 500.0});
  sim::Xoshiro256 rng(2);
  const auto d = assign(net, seed_at(1, 0, 0.0, 40, 0.9), pred, 1.0, rng);
  EXPECT_FALSE(d.candidates[0].ok);
  EXPECT_FALSE(d.candidates[0].diagnostic.empty());
  EXPECT_EQ(d.chosen, 1);
  FixedPredictor none({-1.0, -1.0});
  const auto f = assign(net, seed_at(2, 1, 0.0, 40, 0.9), none, 1.0, rng);
  EXPECT_TRUE(f.fallback);
  EXPECT_EQ(f.visited, 1);
}

TEST(Assign, NonCompliersGoToTheirUsualFacility) {
  auto net = two_phcs(9, 2, 1);
  FixedPredictor pred({100.0, 1.0});
  sim::Xoshiro256 rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto d = assign(net, seed_at(i, 0, 0.0, 40, 0.9), pred, 0.0, rng);
    ASSERT_EQ(d.chosen, 1);
    ASSERT_FALSE(d.complied);
    ASSERT_EQ(d.visited, 0);
  }
}

TEST(Assign, AuditRowMatchesHeaderWidth) {
  auto net = two_phcs(9, 2, 1);
  FixedPredictor pred({20.0, 5.0});
  sim::Xoshiro256 rng(2);
  std::ostringstream h, r;
  write_assignment_header(h, 2);
  write_assignment_row(r, 0, assign(net, seed_at(1, 0, 0.0, 40, 0.9), pred, 1.0, rng));
  auto cols = [](const std::string& s) { return std::count(s.begin(), s.end(), ',') + 1; };
  EXPECT_EQ(cols(h.str()), cols(r.str()));
}

TEST(Oracle, EmptyFacilityYoungPatientWithoutLab) {
  phc::Facility f(0, test::constant_config(), 1);
  const auto p = test::patient(1, 0.0, 20, false, PatientClass::Outpatient, {3.0, 1.25, 4.0, 2.5});
  EXPECT_DOUBLE_EQ(ActualLosOracle::realize(f, p), 1.25 + 2.5);
}

TEST(Oracle, DeterministicAndLeavesTheFacilityUntouched) {
  auto net = two_phcs(9, 2, 4);
  net.start(3 * phc::kMinutesPerDay);
  net.run_until(300.0);
  const auto before = net.facility(1).calendar().size();
  ActualLosOracle oracle;
  const auto s = seed_at(999999, 0, 300.0, 45, 0.2);
  const double a = oracle.predict(net, 1, s, 30.0);
  const double b = oracle.predict(net, 1, s, 30.0);
  EXPECT_EQ(a, b);
  EXPECT_GT(a, 0.0);
  EXPECT_EQ(net.facility(1).calendar().size(), before);
  EXPECT_FALSE(net.facility(1).has_patient(999999));
}

// The clairvoyant prediction equals the realized LOS whenever no outpatient
// deciding later reaches the same facility before the patient leaves.
TEST(Oracle, ReplaysTheMainRun) {
  auto net = two_phcs(20, 12, 6);
  ActualLosOracle oracle;
  std::map<std::uint64_t, double> predicted;
  auto inner = make_decider(oracle, 1.0, [&](const phc::Network&, const phc::OutpatientSeed& s, const AssignmentDecision& d) {
    predicted[s.id] = d.candidates[static_cast<std::size_t>(d.visited)].predicted;
  });
  net.set_decider(inner);
  net.start(20 * phc::kMinutesPerDay);
  net.finish();
  const auto& done = net.completed();
  std::size_t checked = 0;
  for (const auto& p : done) {
    bool interfered = false;
    for (const auto& q : done)
      if (q.id != p.id && q.visited == p.visited && q.decided_at > p.decided_at && q.decided_at < p.exit)
        interfered = true;
    if (interfered) continue;
    ++checked;
    ASSERT_DOUBLE_EQ(predicted.at(p.id), p.los()) << "patient " << p.id;
  }
  EXPECT_GT(checked, 200u);
}

// Constant services, no competing traffic: the oracle and AQT agree exactly.
TEST(Oracle, MatchesAqtWithoutVariance) {
  auto cfg = test::constant_config();
  const double never = std::numeric_limits<double>::infinity();
  cfg.outpatient_interarrival = sim::Constant{never};
  cfg.inpatient_interarrival = sim::Constant{never};
  cfg.childbirth_interarrival = sim::Constant{never};
  phc::Facility f(0, cfg, 1);
  f.start_priority_arrivals(10 * phc::kMinutesPerDay);
  for (double delta : {0.0, 15.0, 30.0})
    for (double age : {20.0, 45.0})
      for (bool lab : {false, true}) {
        auto p = test::patient(1, delta, age, lab);
        const double oracle = ActualLosOracle::realize(f, p);
        const double aqt = aqt::predict(f.observe(), cfg, delta, age >= 30.0, lab ? 1.0 : 0.0).los.total;
        EXPECT_DOUBLE_EQ(oracle, aqt) << "delta=" << delta << " age=" << age << " lab=" << lab;
      }
}

TEST(Assignment, ConservesPatients) {
  // Network-wide arrivals with and without assignment, over 6 seeds each.
  std::vector<double> with, without;
  for (std::uint64_t s = 1; s <= 6; ++s) {
    auto a = two_phcs(9, 2, s), b = two_phcs(9, 2, s + 100);
    AqtLosPredictor aqt;
    a.set_decider(make_decider(aqt, 1.0));
    for (auto* n : {&a, &b}) {
      n->start(10 * phc::kMinutesPerDay);
      n->finish();
    }
    with.push_back(static_cast<double>(a.completed().size()));
    without.push_back(static_cast<double>(b.completed().size()));
  }
  auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
  const double expected = 10.0 * (480.0 / 9.0 + 480.0 / 2.0);
  const double se = std::sqrt(expected / 6.0);
  EXPECT_NEAR(mean(with), mean(without), 2.0 * std::sqrt(2.0) * se);
  // Same seed: identical appearance process, so identical totals.
  auto a = two_phcs(9, 2, 7), b = two_phcs(9, 2, 7);
  AqtLosPredictor aqt;
  a.set_decider(make_decider(aqt, 1.0));
  for (auto* n : {&a, &b}) {
    n->start(5 * phc::kMinutesPerDay);
    n->finish();
  }
  EXPECT_EQ(a.completed().size(), b.completed().size());
}

TEST(Calibration, NoDiversionKeepsTheOriginalLambda) {
  auto net = two_phcs(9, 4, 11);
  AqtLosPredictor aqt;
  net.set_decider(make_decider(aqt, 0.0));
  CalibrationOptions opt;
  opt.window_days = 30;
  opt.max_windows = 6;
  const auto c = effective_lambda(net, opt);
  const std::vector<double> lambda{9.0, 4.0};
  for (std::size_t f = 0; f < 2; ++f) {
    EXPECT_EQ(c.trace[f][0], lambda[f]);
    const double n = opt.window_days * 480.0 / lambda[f];
    for (std::size_t i = 1; i < c.trace[f].size(); ++i)
      EXPECT_NEAR(c.trace[f][i], lambda[f], 4.0 * lambda[f] / std::sqrt(n)) << "facility " << f << " window " << i;
  }
}

TEST(Calibration, SymmetricNetworkGivesEqualLambdas) {
  auto net = two_phcs(4, 4, 13);
  AqtLosPredictor aqt;
  net.set_decider(make_decider(aqt, 1.0));
  const auto c = effective_lambda(net, CalibrationOptions{});
  EXPECT_NEAR(c.lambda_eff[0], c.lambda_eff[1], CalibrationOptions{}.epsilon);
}

TEST(Calibration, EmptyWindowUsesTheCap) {
  auto cfg = test::quiet_config();
  cfg.outpatient_interarrival = sim::Constant{1e9};
  phc::Network net({cfg}, phc::TravelMatrix::uniform(1, 15, 15), 1);
  CalibrationOptions opt;
  opt.window_days = 2;
  opt.max_windows = 3;
  const auto c = effective_lambda(net, opt);
  EXPECT_EQ(c.arrivals[0][0], 0u);
  EXPECT_EQ(c.trace[0][1], opt.empty_window_cap);
  EXPECT_TRUE(c.converged);
  EXPECT_EQ(c.windows, 2);
  EXPECT_EQ(c.lambda_eff[0], opt.empty_window_cap);
}

TEST(Calibration, TraceInvariants) {
  auto net = two_phcs(9, 2, 17);
  AqtLosPredictor aqt;
  net.set_decider(make_decider(aqt, 1.0));
  CalibrationOptions opt;
  opt.window_days = 20;
  opt.max_windows = 5;
  const auto c = effective_lambda(net, opt);
  ASSERT_EQ(c.trace.size(), 2u);
  for (std::size_t f = 0; f < 2; ++f) {
    ASSERT_EQ(c.trace[f].size(), static_cast<std::size_t>(c.windows) + 1);
    ASSERT_EQ(c.arrivals[f].size(), static_cast<std::size_t>(c.windows));
    for (std::size_t i = 1; i < c.trace[f].size(); ++i) {
      EXPECT_TRUE(std::isfinite(c.trace[f][i]));
      EXPECT_DOUBLE_EQ(c.trace[f][i], opt.window_days * 480.0 / c.arrivals[f][i - 1]);
    }
  }
  const auto& t = c.trace;
  const auto last = t[0].size() - 1;
  const bool settled = std::fabs(t[0][last] - t[0][last - 1]) < opt.epsilon &&
                       std::fabs(t[1][last] - t[1][last - 1]) < opt.epsilon;
  EXPECT_EQ(c.converged, settled);
  if (!c.converged) {
    EXPECT_DOUBLE_EQ(c.lambda_eff[0], 0.5 * (t[0][last] + t[0][last - 1]));
  } else {
    EXPECT_EQ(c.lambda_eff[0], t[0][last]);
  }
}

TEST(Calibration, RelaxedUpdateStepsPartWay) {
  auto net = two_phcs(9, 2, 17);
  AqtLosPredictor aqt;
  net.set_decider(make_decider(aqt, 1.0));
  CalibrationOptions opt;
  opt.window_days = 20;
  opt.max_windows = 3;
  opt.relaxation = 0.5;
  const auto c = effective_lambda(net, opt);
  for (std::size_t f = 0; f < 2; ++f)
    for (std::size_t i = 1; i < c.trace[f].size(); ++i) {
      const double estimate = opt.window_days * 480.0 / c.arrivals[f][i - 1];
      EXPECT_DOUBLE_EQ(c.trace[f][i], c.trace[f][i - 1] + 0.5 * (estimate - c.trace[f][i - 1]));
    }
}

TEST(Calibration, RejectsBadOptions) {
  auto net = two_phcs(9, 2, 1);
  CalibrationOptions opt;
  opt.window_days = 0.5;
  EXPECT_THROW(effective_lambda(net, opt), std::invalid_argument);
  opt = CalibrationOptions{};
  opt.epsilon = 0.0;
  EXPECT_THROW(effective_lambda(net, opt), std::invalid_argument);
}
