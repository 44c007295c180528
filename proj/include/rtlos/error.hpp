#pragma once

#include <stdexcept>

namespace rtlos {

// Invalid scenario, facility, or distribution parameters.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Priority-class load too high for the geometric delay correction to converge.
class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A replication or forward clone could not complete.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rtlos
