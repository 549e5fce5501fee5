#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "e2h/params.hpp"

namespace e2h {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  bool fast = false;      // reduced grids and replication counts
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Runs every invariant of the toolkit against `p` (defaults recommended).
/// The optional callback is invoked after each property completes.
std::vector<PropertyResult> run_property_suite(const TheoryParams& p, const VerifyOptions& opt,
                                               const std::function<void(const PropertyResult&)>& on_result = {});

}  // namespace e2h
