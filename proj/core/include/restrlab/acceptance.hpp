#pragma once

#include <functional>
#include <string>
#include <vector>

namespace restrlab {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool ok = false;       // the measured property holds
  double seconds = 0;
  double budget = 0;     // runtime budget in seconds
  std::string detail;
  bool pass() const { return ok && seconds < budget; }
};

// "PASS  9 dyadic double sums  [1.52 s / 60 s] detail"
std::string format_line(const CriterionResult& r);

// Runs the fifteen acceptance criteria (or the listed ids) in order; `on_result`
// sees each result as soon as it is available.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& only = {},
                                            const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace restrlab
