#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bountylab/optimizer.hpp"

namespace bountylab::cli {

enum ExitCode : int { kSuccess = 0, kAssertionFailure = 1, kConfigError = 2 };

/// Entry point shared by the binary and the tests. argv[0] is ignored.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct CaseStudyOptions {
  std::int64_t traces = 4096;
  std::string tx_per_day = "230";
  std::string cloud_cost = "97.9";
  double key_value = 36000;
  int threshold = 10;
  int n_shares = 20;
  int horizon_days = 30;
};

CaseStudyModel case_study(const CaseStudyOptions& options);
/// Table with days_per_share, C(k) for k = 1..m and the total C(m).
void write_case_study(std::ostream& out, const CaseStudyModel& model);

}  // namespace bountylab::cli
