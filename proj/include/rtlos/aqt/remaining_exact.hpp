#pragma once

#include <algorithm>
#include <cmath>
#include <type_traits>
#include <variant>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rtlos/sim/distribution.hpp"

namespace rtlos::aqt {

// E[V | X > x] with V = X - x, from the conditional survival function:
// w(x) = (integral of S(u) for u > x) / S(x). Gaussians are the positive-truncated
// variant the simulator samples.
inline double remaining_service_time_exact(const sim::ServiceDistribution& dist, double x) {
  using boost::math::quadrature::gauss_kronrod;
  return std::visit(
      [x](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, sim::Exponential>) {
          return d.mean;
        } else if constexpr (std::is_same_v<T, sim::Constant>) {
          return std::max(d.value - x, 0.0);
        } else if constexpr (std::is_same_v<T, sim::Uniform>) {
          if (x >= d.b) return 0.0;
          const double lo = std::max(x, d.a);
          auto survival = [&](double u) { return u < d.a ? 1.0 : (d.b - u) / (d.b - d.a); };
          const double tail = (lo - x) + gauss_kronrod<double, 61>::integrate(survival, lo, d.b, 8, 1e-12);
          return tail / survival(x);
        } else {
          auto phi_c = [&](double u) { return 0.5 * std::erfc((u - d.mu) / (d.sigma * std::sqrt(2.0))); };
          const double norm = phi_c(0.0);
          auto survival = [&](double u) { return u <= 0.0 ? 1.0 : phi_c(u) / norm; };
          const double upper = d.mu + 12.0 * d.sigma;
          if (x >= upper) return 0.0;
          const double lo = std::max(x, 0.0);
          const double tail = (lo - x) + gauss_kronrod<double, 61>::integrate(survival, lo, upper, 10, 1e-13);
          const double s = survival(x);
          return s > 0.0 ? tail / s : 0.0;
        }
      },
      dist);
}

}  // namespace rtlos::aqt
