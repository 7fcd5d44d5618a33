#pragma once

#include <string>
#include <vector>

namespace specdet {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double measured = 0.0;  // worst deviation found
  double threshold = 0.0;
  double seconds = 0.0;
  double time_limit = 0.0;
  std::vector<std::string> details;
  std::string error;  // set when the run threw
};

struct AcceptanceReport {
  std::vector<CriterionResult> criteria;
  bool all_passed() const;
};

/// Number of acceptance criteria (ids 1..count).
int acceptance_count();

/// Runs one criterion; exceptions are caught and reported as a failure.
CriterionResult run_criterion(int id);

/// Runs the given criteria in order; an empty list runs them all.
AcceptanceReport run_acceptance(const std::vector<int>& ids = {});

/// One line per criterion: `[PASS] 3 three-way trace agreement: 4.1e-09 < 1e-06 (2.3 s / 60 s)`.
std::string format_line(const CriterionResult& r);

}  // namespace specdet
