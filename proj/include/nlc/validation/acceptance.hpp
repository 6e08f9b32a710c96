#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nlc::validation {

enum class Status { Pass, Fail, Skip };

std::string to_string(Status s);

struct CriterionResult {
  int id = 0;
  std::string name;
  Status status = Status::Skip;
  std::string detail;
  double seconds = 0.0;
};

struct SuiteOptions {
  /// Monthly N3.4 anomaly series (CSV). Criterion 11 is skipped without it.
  std::optional<std::filesystem::path> nino_series;
  /// Column holding the anomaly; empty picks "anomaly" if present, else the last column.
  std::string nino_column;
  /// Criteria to run (1..11); empty runs all of them.
  std::vector<int> only;
  std::uint64_t seed = 1;
};

inline constexpr int kCriterionCount = 11;

/// Runs the selected criteria in order. `on_result` is called as each one finishes.
std::vector<CriterionResult> run_suite(const SuiteOptions& options,
                                       const std::function<void(const CriterionResult&)>& on_result = {});

/// True when no criterion failed (skips do not count as failures).
bool all_passed(const std::vector<CriterionResult>& results);

/// `[PASS] 3 acv agreement (4.1 s): detail`
void print_result(std::ostream& os, const CriterionResult& result);

}  // namespace nlc::validation
