#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace conecap::verify {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // deterministic summary numbers, never timing
};

/// Runs the full invariant suite under one master seed. The thread count
/// only spreads the work; results and details are identical for any value.
std::vector<CheckResult> run_all(std::uint64_t seed, int threads = 1);

bool all_pass(const std::vector<CheckResult>& results);

/// JSON document {"seed": ..., "checks": [...], "all_pass": ...} with a
/// fixed field order.
std::string to_json(const std::vector<CheckResult>& results, std::uint64_t seed);

}  // namespace conecap::verify
