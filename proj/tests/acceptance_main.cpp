#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "restrlab/acceptance.hpp"

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  int failed = 0;
  const auto results = restrlab::run_acceptance(only, [](const restrlab::CriterionResult& r) {
    std::printf("%s\n", restrlab::format_line(r).c_str());
    std::fflush(stdout);
  });
  for (const auto& r : results) failed += !r.pass();
  std::printf("%zu criteria, %d failed\n", results.size(), failed);
  return failed ? 1 : 0;
}
