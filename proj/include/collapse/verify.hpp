#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "collapse/model.hpp"

namespace collapse {

struct CheckResult {
  std::string name;
  double value = 0.0;      // residual or measured quantity
  double tolerance = 0.0;  // pass when value <= tolerance
  bool passed = false;
};

/// Deterministic identity and property checks for the closed-form parts of
/// the model, run at natural-unit parameters `p` and at the SI reference
/// constants. Random sweeps are seeded by `seed`.
std::vector<CheckResult> run_verification(const ModelParams& p, std::uint64_t seed);

}  // namespace collapse
