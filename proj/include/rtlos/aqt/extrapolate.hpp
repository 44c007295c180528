#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rtlos/aqt/remaining.hpp"

namespace rtlos::aqt {

// Expected state of a station at t + delta and the LOS of a patient joining it
// then. Counts are expectations and stay real-valued.
struct ExtrapolatedState {
  double arrivals = 0.0;     // A
  double completions = 0.0;  // N
  double queue_len = 0.0;    // L_q at t + delta
  double elapsed = 0.0;      // x at t + delta
  double remaining = 0.0;    // w(x) at t + delta
  double delay = 0.0;        // D
  double los = 0.0;          // L = D + E[X]
};

// Observed state at t reduced to what the extrapolation needs.
struct StationObservation {
  double queue_len = 0.0;
  std::vector<double> remaining{0.0};  // w(x_t) per server
  bool busy = false;

  double net_remaining() const { return *std::min_element(remaining.begin(), remaining.end()); }
};

inline double expected_arrivals(double delta, double interarrival) {
  if (!(interarrival > 0.0)) throw std::invalid_argument("mean interarrival time must be > 0");
  return std::max(delta / interarrival - 1.0, 0.0);
}

// Floor-clamped count of services of mean `service` that fit in `span`.
inline double services_within(double span, double service) { return std::max(std::floor(span / service), 0.0); }

// Elapsed service at t + delta of a server whose current job has w_t left.
inline double elapsed_after(double delta, double w_t, double service) {
  return std::fmod(std::fabs(delta - w_t), service);
}

// M/G/m state extrapolation over `delta` minutes for a single-class station
// with mean interarrival `interarrival` and service distribution `dist`.
inline ExtrapolatedState extrapolate_mgm(const StationObservation& obs, double delta, double interarrival,
                                         const sim::ServiceDistribution& dist) {
  if (delta < 0.0) throw std::invalid_argument("delta must be >= 0");
  const double service = sim::mean(dist);
  const auto q = anchors(dist);
  const double w_t = obs.net_remaining();
  const double m = static_cast<double>(obs.remaining.size());
  ExtrapolatedState out;
  if (delta == 0.0) {
    out.queue_len = obs.queue_len;
    out.remaining = w_t;
    out.delay = obs.queue_len * service + w_t;
    out.los = out.delay + service;
    return out;
  }
  out.arrivals = expected_arrivals(delta, interarrival);
  out.completions = std::min(obs.queue_len + 0.5 * out.arrivals, m * services_within(delta - w_t, service));
  out.queue_len = std::max(obs.queue_len + out.arrivals - out.completions, 0.0);
  const bool busy_later = obs.busy || obs.queue_len > 0.0 || out.arrivals > 0.0;
  if (busy_later) {
    double best = -1.0;
    for (double w_j : obs.remaining) {
      const double x = elapsed_after(delta, w_j, service);
      const double w = remaining_service_time(q, x);
      if (best < 0.0 || w < best) {
        best = w;
        out.elapsed = x;
      }
    }
    out.remaining = best;
  }
  out.delay = out.queue_len * service + out.remaining;
  out.los = out.delay + service;
  return out;
}

}  // namespace rtlos::aqt
