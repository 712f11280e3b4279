#pragma once

// Property suites at reduced Monte-Carlo sizes, run by `past selftest`.

#include "past/losses.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace past {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelfTestReport {
  std::vector<CheckResult> checks;
  bool ok() const;
  void print(std::ostream& out) const;
};

SelfTestReport self_test();

/// Worst |fd - g| / max(|g|, 1) over `points` grid points, with central
/// differences on the prediction argument.
double max_gradient_error(const LossSpec& spec, int points = 100);
/// Worst |mean(link(m)) - m| over `points` means inside the response range.
double max_link_inverse_error(const LossSpec& spec, int points = 100);

}  // namespace past
