// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace swarminfer {

// malformed or contradictory configuration input (CLI maps this to exit 2)
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// no feasible assignment/placement exists; names the binding constraint (exit 3)
struct InfeasibleError : std::runtime_error {
  explicit InfeasibleError(const std::string& what, std::string constraint = "")
      : std::runtime_error(what), binding_constraint(std::move(constraint)) {}
  std::string binding_constraint;
};

// NaN/Inf or other numeric breakdown during training or evaluation (exit 4)
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace swarminfer
