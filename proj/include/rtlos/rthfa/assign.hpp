#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "rtlos/phc/network.hpp"
#include "rtlos/rthfa/predictors.hpp"
#include "rtlos/sim/rng.hpp"

namespace rtlos::rthfa {

struct Candidate {
  int facility = 0;
  double travel = 0.0;     // delta_j
  double predicted = 0.0;  // L_j(t + delta_j)
  double score = 0.0;      // delta_j + L
  bool ok = true;
  std::string diagnostic;
};

struct AssignmentDecision {
  std::uint64_t patient = 0;
  double decided_at = 0.0;
  int preferred = 0;
  std::vector<Candidate> candidates;
  int chosen = 0;
  bool complied = true;
  int visited = 0;
  bool fallback = false;  // every predictor failed; nearest facility used
};

// argmin of delta + L over the candidates that produced a prediction; ties go
// to the lower facility index. If none did, the nearest facility (the
// preferred one on equal travel) is chosen.
inline int choose(const std::vector<Candidate>& candidates, int preferred, bool* fallback = nullptr) {
  int best = -1;
  double best_score = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    if (!c.ok) continue;
    if (best < 0 || c.score < best_score || (c.score == best_score && c.facility < best)) {
      best = c.facility;
      best_score = c.score;
    }
  }
  if (fallback) *fallback = best < 0;
  if (best >= 0) return best;
  int nearest = preferred;
  double nearest_travel = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    if (c.travel < nearest_travel || (c.travel == nearest_travel && c.facility == preferred)) {
      nearest = c.facility;
      nearest_travel = c.travel;
    }
  }
  return nearest;
}

// Bernoulli compliance; always consumes one draw so the stream position does
// not depend on the rate.
inline bool comply(double rate, sim::Xoshiro256& rng) { return rng.uniform01() < rate; }

inline AssignmentDecision assign(phc::Network& net, const phc::OutpatientSeed& seed, LosPredictor& predictor,
                                 double compliance, sim::Xoshiro256& compliance_rng) {
  AssignmentDecision d;
  d.patient = seed.id;
  d.decided_at = seed.decided_at;
  d.preferred = seed.origin;
  for (int j = 0; j < static_cast<int>(net.size()); ++j) {
    Candidate c;
    c.facility = j;
    c.travel = net.travel()(seed.origin, j);
    try {
      c.predicted = predictor.predict(net, j, seed, c.travel);
      c.score = c.travel + c.predicted;
      if (!std::isfinite(c.score)) {
        c.ok = false;
        c.diagnostic = "non-finite prediction";
      }
    } catch (const std::exception& e) {
      c.ok = false;
      c.diagnostic = e.what();
    }
    d.candidates.push_back(c);
  }
  d.chosen = choose(d.candidates, seed.origin, &d.fallback);
  d.complied = comply(compliance, compliance_rng);
  d.visited = d.complied ? d.chosen : seed.origin;
  return d;
}

// Decider running RT-HFA for every outpatient; decisions are passed to
// `on_decision` when set.
inline phc::Decider make_decider(LosPredictor& predictor, double compliance,
                                 std::function<void(const phc::Network&, const phc::OutpatientSeed&,
                                                    const AssignmentDecision&)> on_decision = {}) {
  return [&predictor, compliance, on_decision](phc::Network& net, const phc::OutpatientSeed& seed) {
    auto& rng = net.stream({sim::StreamKind::Compliance, static_cast<std::uint16_t>(seed.origin), 0});
    const auto d = assign(net, seed, predictor, compliance, rng);
    if (on_decision) on_decision(net, seed, d);
    return d.visited;
  };
}

inline void write_assignment_header(std::ostream& out, std::size_t facilities) {
  out << "replication,patient,decided_at,preferred";
  for (std::size_t j = 0; j < facilities; ++j)
    out << ",travel_" << j << ",predicted_" << j << ",score_" << j << ",ok_" << j;
  out << ",chosen,complied,visited,fallback\n";
}

inline void write_assignment_row(std::ostream& out, int replication, const AssignmentDecision& d) {
  out << replication << ',' << d.patient << ',' << d.decided_at << ',' << d.preferred;
  for (const auto& c : d.candidates)
    out << ',' << c.travel << ',' << c.predicted << ',' << c.score << ',' << (c.ok ? 1 : 0);
  out << ',' << d.chosen << ',' << (d.complied ? 1 : 0) << ',' << d.visited << ',' << (d.fallback ? 1 : 0) << '\n';
}

}  // namespace rtlos::rthfa
