#pragma once

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rtlos/error.hpp"
#include "rtlos/sim/rng.hpp"

namespace rtlos::sim {

// All parameters are in minutes.
struct Exponential {
  double mean = 1.0;
};
struct Uniform {
  double a = 0.0;
  double b = 1.0;
};
// Normal(mu, sigma) truncated to positive values by rejection.
struct Gaussian {
  double mu = 1.0;
  double sigma = 1.0;
};
// Degenerate (zero-variance) time, used for deterministic scenarios.
struct Constant {
  double value = 1.0;
};

using ServiceDistribution = std::variant<Exponential, Uniform, Gaussian, Constant>;

inline void validate(const ServiceDistribution& dist) {
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          if (!(d.mean > 0.0)) throw ConfigError("exponential mean must be > 0");
        } else if constexpr (std::is_same_v<T, Uniform>) {
          if (!(d.a >= 0.0 && d.a < d.b)) throw ConfigError("uniform requires 0 <= a < b");
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          if (!(d.mu > 0.0 && d.sigma > 0.0)) throw ConfigError("gaussian requires mu > 0 and sigma > 0");
        } else {
          if (!(d.value > 0.0)) throw ConfigError("constant time must be > 0");
        }
      },
      dist);
}

// Expected value. The truncated Gaussian reports mu (truncation bias ignored).
inline double mean(const ServiceDistribution& dist) {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) return d.mean;
        else if constexpr (std::is_same_v<T, Uniform>) return 0.5 * (d.a + d.b);
        else if constexpr (std::is_same_v<T, Gaussian>) return d.mu;
        else return d.value;
      },
      dist);
}

inline double variance(const ServiceDistribution& dist) {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) return d.mean * d.mean;
        else if constexpr (std::is_same_v<T, Uniform>) return (d.b - d.a) * (d.b - d.a) / 12.0;
        else if constexpr (std::is_same_v<T, Gaussian>) return d.sigma * d.sigma;
        else return 0.0;
      },
      dist);
}

inline double sample(const ServiceDistribution& dist, Xoshiro256& rng) {
  return std::visit(
      [&rng](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return -d.mean * std::log1p(-rng.uniform01());
        } else if constexpr (std::is_same_v<T, Uniform>) {
          return d.a + (d.b - d.a) * rng.uniform01();
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          for (;;) {
            const double u1 = rng.uniform01();
            const double u2 = rng.uniform01();
            const double z = std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
            const double x = d.mu + d.sigma * z;
            if (x > 0.0) return x;
          }
        } else {
          return d.value;
        }
      },
      dist);
}

inline std::string to_string(const ServiceDistribution& dist) {
  std::ostringstream out;
  out.precision(17);
  std::visit(
      [&out](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) out << "exp(" << d.mean << ")";
        else if constexpr (std::is_same_v<T, Uniform>) out << "uniform(" << d.a << "," << d.b << ")";
        else if constexpr (std::is_same_v<T, Gaussian>) out << "normal(" << d.mu << "," << d.sigma << ")";
        else out << "const(" << d.value << ")";
      },
      dist);
  return out.str();
}

// Parses `exp(9)`, `uniform(2,5)`, `normal(0.87,0.21)` (sigma, not variance)
// or `const(3)`.
inline ServiceDistribution parse_distribution(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  const auto open = text.find('(');
  const auto close = text.rfind(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open || close != text.size() - 1)
    throw ConfigError("malformed distribution '" + std::string(text) + "'");
  std::string kind(trim(text.substr(0, open)));
  for (auto& c : kind) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

  std::vector<double> args;
  std::string_view rest = text.substr(open + 1, close - open - 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    std::string token(trim(rest.substr(0, comma)));
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(token, &used);
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + token + "' in distribution");
    }
    if (used != token.size()) throw ConfigError("bad number '" + token + "' in distribution");
    args.push_back(value);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }

  auto expect = [&](std::size_t n) {
    if (args.size() != n) throw ConfigError("distribution '" + kind + "' takes " + std::to_string(n) + " argument(s)");
  };
  ServiceDistribution dist;
  if (kind == "exp" || kind == "exponential") {
    expect(1);
    dist = Exponential{args[0]};
  } else if (kind == "uniform" || kind == "u") {
    expect(2);
    dist = Uniform{args[0], args[1]};
  } else if (kind == "normal" || kind == "gaussian" || kind == "n") {
    expect(2);
    dist = Gaussian{args[0], args[1]};
  } else if (kind == "const" || kind == "constant") {
    expect(1);
    dist = Constant{args[0]};
  } else {
    throw ConfigError("unknown distribution kind '" + kind + "'");
  }
  validate(dist);
  return dist;
}

}  // namespace rtlos::sim
