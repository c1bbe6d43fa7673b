#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pfednet {

struct RunSummary {
  std::string run_dir;
  double gamma = 0.0;
  double lambda = 0.0;
  double mean_accuracy = 0.0;
  std::uint64_t uplink_bytes = 0;
  std::uint64_t downlink_bytes = 0;
  double max_pairwise_gap = 0.0;
};

// Reads run.json, metrics.csv and checkpoint.json from a train output dir.
RunSummary summarize_run(const std::string& run_dir);

enum class ReportKey { kGamma, kLambda };

ReportKey parse_report_key(const std::string& text);

// Rows sorted by the key. reduction_pct compares uplink bytes against the
// run with the smallest key value.
std::string report_csv(std::vector<RunSummary> runs, ReportKey key);

}  // namespace pfednet
