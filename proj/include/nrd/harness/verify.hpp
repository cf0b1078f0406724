// verify.hpp - quick self-check of the model invariants on a small grid.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nrd::harness {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<CheckResult> run_property_checks(std::uint64_t seed);

}  // namespace nrd::harness
