#pragma once

#include <algorithm>
#include <stdexcept>
#include <type_traits>
#include <variant>

#include "rtlos/error.hpp"
#include "rtlos/phc/types.hpp"
#include "rtlos/sim/distribution.hpp"

namespace rtlos::aqt {

// Median, upper quartile and extreme quantile used by the piecewise
// remaining-time estimator.
struct QuantileAnchors {
  double median = 0.0;
  double upper_quartile = 0.0;
  double extreme = 0.0;
};

inline QuantileAnchors anchors(const sim::ServiceDistribution& dist) {
  return std::visit(
      [](const auto& d) -> QuantileAnchors {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, sim::Uniform>) {
          return {0.5 * (d.a + d.b), 0.25 * (d.a + 3.0 * d.b), d.b};
        } else if constexpr (std::is_same_v<T, sim::Gaussian>) {
          return {d.mu, d.mu + 0.675 * d.sigma, d.mu + 3.0 * d.sigma};
        } else if constexpr (std::is_same_v<T, sim::Constant>) {
          return {d.value, d.value, d.value};
        } else {
          throw ConfigError("piecewise remaining-time estimator needs a symmetric unimodal distribution");
        }
      },
      dist);
}

// Expected remaining service time w(x) given elapsed service x.
inline double remaining_service_time(const QuantileAnchors& q, double x) {
  if (x < 0.0) throw std::invalid_argument("elapsed service time must be >= 0");
  if (x < q.median) return q.median - x;
  if (x < q.upper_quartile) return q.upper_quartile - x;
  if (x <= q.extreme) return 0.5 * (q.extreme - x);
  return 0.0;
}

inline double remaining_service_time(const sim::ServiceDistribution& dist, double x) {
  return remaining_service_time(anchors(dist), x);
}

// Net remaining time of a workstation: the smallest w over its servers. An
// idle server contributes 0.
template <class DistFor>
double workstation_remaining(const phc::SubsystemState& state, DistFor&& dist_for) {
  double best = -1.0;
  for (const auto& server : state.servers) {
    const double w = server.busy ? remaining_service_time(dist_for(server.cls), server.elapsed) : 0.0;
    best = best < 0.0 ? w : std::min(best, w);
  }
  return std::max(best, 0.0);
}

}  // namespace rtlos::aqt
