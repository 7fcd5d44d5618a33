// Runs every acceptance criterion and prints one line per criterion.
#include <cstdio>

#include "specdet/acceptance.hpp"

int main() {
  const specdet::AcceptanceReport report = specdet::run_acceptance();
  int failed = 0;
  for (const auto& c : report.criteria) {
    std::printf("%s\n", specdet::format_line(c).c_str());
    for (const auto& d : c.details) std::printf("      %s\n", d.c_str());
    if (!c.passed) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(report.criteria.size()) - failed, report.criteria.size());
  return failed == 0 ? 0 : 1;
}
