#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ssc/stattest.hpp"

namespace ssc::suites {

struct Check {
  TestReport report;
  bool gating = true;
};

struct CriterionResult {
  int id = 0;
  std::string suite;   // short name, e.g. "figure1"
  std::string title;
  bool gating = true;  // false: exploratory, never fails the suite
  bool pass = false;   // all gating checks passed
  std::vector<Check> checks;
  std::vector<std::string> lines;  // human-readable details
  double seconds = 0.0;
};

struct SuiteOptions {
  std::uint64_t seed = 1;
  std::size_t workers = 1;
};

inline constexpr int kCriterionCount = 13;

std::string suite_name(int id);
std::optional<int> criterion_for_suite(const std::string& name);
std::vector<std::string> suite_names();

CriterionResult run_criterion(int id, const SuiteOptions& opts);

// "PASS c01 figure1 ..." followed by one indented line per check and detail.
void print_result(std::ostream& out, const CriterionResult& r);

}  // namespace ssc::suites
