// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <cstdio>

#include "fracnoether/acceptance.hpp"

int main() {
  const auto results = fracnoether::run_acceptance();
  int failed = 0;
  for (const auto& r : results) {
    std::printf("%s criterion %2d: %s\n    %s\n", r.passed ? "PASS" : "FAIL", r.id, r.title.c_str(),
                r.measured.c_str());
    if (!r.passed) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
  return failed == 0 ? 0 : 1;
}
