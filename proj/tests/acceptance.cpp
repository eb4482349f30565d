// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "grw/acceptance.hpp"

#include <cstdio>

int main() {
  grw::AcceptanceOptions options;
  options.threads = grw::default_thread_count();
  int failures = 0;
  grw::run_acceptance(options, [&](const grw::CriterionResult& r) {
    std::printf("%s\n", grw::format_criterion(r).c_str());
    std::fflush(stdout);
    failures += r.pass ? 0 : 1;
  });
  std::printf("%d of %d criteria failed\n", failures, grw::kCriterionCount);
  return failures == 0 ? 0 : 1;
}
