// One line per acceptance criterion; exits nonzero if any criterion fails.
// Usage: nlc_acceptance [criterion ids...]
// NLC_NINO34 names the monthly N3.4 anomaly CSV for criterion 11.

#include <cstdlib>
#include <iostream>
#include <string>

#include "nlc/validation/acceptance.hpp"

int main(int argc, char** argv) {
  using namespace nlc::validation;
  SuiteOptions opt;
  if (const char* path = std::getenv("NLC_NINO34"); path && *path) opt.nino_series = path;
  for (int i = 1; i < argc; ++i) opt.only.push_back(std::stoi(argv[i]));

  const auto results = run_suite(opt, [](const CriterionResult& r) { print_result(std::cout, r); });
  int pass = 0, fail = 0, skip = 0;
  for (const auto& r : results) {
    pass += r.status == Status::Pass;
    fail += r.status == Status::Fail;
    skip += r.status == Status::Skip;
  }
  std::cout << pass << " passed, " << fail << " failed, " << skip << " skipped\n";
  return fail == 0 ? 0 : 1;
}
