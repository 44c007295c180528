#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rtlos/phc/network.hpp"

namespace rtlos::rthfa {

struct CalibrationOptions {
  double window_days = 90.0;  // T_0
  double epsilon = 0.1;       // minutes
  int max_windows = 20;
  double multiplier = 2.0;      // M: initial lambda_i = M * lambda
  double empty_window_cap = 1e4;  // lambda_i when a window sees no arrivals
  // Step toward the new estimate: lambda <- lambda + r (T_0 / N - lambda).
  // 1 is the plain fixed-point update.
  double relaxation = 1.0;
};

struct LambdaCalibration {
  // trace[f][0] is the original lambda; entry i is the estimate after window i.
  std::vector<std::vector<double>> trace;
  std::vector<std::vector<std::uint64_t>> arrivals;
  std::vector<double> lambda_eff;
  bool converged = false;
  int windows = 0;
};

// Fixed point of the post-assignment mean outpatient interarrival time. The
// network (decider already installed, not yet started) runs window after window;
// after each one every facility's predictor lambda becomes T_0 * OPD minutes / N
// and the loop stops once all facilities moved by less than epsilon. Without
// convergence the trace is flagged and lambda_eff is the mean of the last two
// iterates.
inline LambdaCalibration effective_lambda(phc::Network& net, const CalibrationOptions& opt = {}) {
  if (!(opt.window_days >= 1.0)) throw std::invalid_argument("T_0 must be at least one day");
  if (!(opt.epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (opt.max_windows < 1) throw std::invalid_argument("max_windows must be >= 1");
  if (!(opt.relaxation > 0.0 && opt.relaxation <= 1.0)) throw std::invalid_argument("relaxation must be in (0,1]");

  const std::size_t n = net.size();
  const double window = opt.window_days * phc::kMinutesPerDay;
  net.start(window * opt.max_windows);

  LambdaCalibration out;
  out.trace.resize(n);
  out.arrivals.resize(n);
  std::vector<double> lambda(n), previous(n);
  std::vector<std::uint64_t> seen(n, 0);
  for (std::size_t f = 0; f < n; ++f) {
    auto& fac = net.facility(static_cast<int>(f));
    lambda[f] = fac.config().outpatient_lambda();
    previous[f] = opt.multiplier * lambda[f];
    out.trace[f].push_back(lambda[f]);
    fac.set_predictor_interarrival(lambda[f]);
  }

  for (int w = 1; w <= opt.max_windows; ++w) {
    net.run_until(window * w);
    bool settled = true;
    for (std::size_t f = 0; f < n; ++f) {
      auto& fac = net.facility(static_cast<int>(f));
      const auto total = fac.arrived(phc::PatientClass::Outpatient);
      const auto count = total - seen[f];
      seen[f] = total;
      const double opd = opt.window_days * fac.config().opd_minutes;
      const double estimate = count > 0 ? opd / static_cast<double>(count) : opt.empty_window_cap;
      const double next = lambda[f] + opt.relaxation * (estimate - lambda[f]);
      previous[f] = lambda[f];
      lambda[f] = next;
      settled = settled && std::fabs(lambda[f] - previous[f]) < opt.epsilon;
      out.trace[f].push_back(next);
      out.arrivals[f].push_back(count);
      fac.set_predictor_interarrival(next);
    }
    out.windows = w;
    if (settled) {
      out.converged = true;
      break;
    }
  }
  out.lambda_eff = lambda;
  // Unconverged traces typically end in a two-cycle; its midpoint is the best
  // available estimate.
  if (!out.converged && out.windows >= 2)
    for (std::size_t f = 0; f < n; ++f) out.lambda_eff[f] = 0.5 * (lambda[f] + previous[f]);
  return out;
}

}  // namespace rtlos::rthfa
