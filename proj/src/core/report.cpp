#include "pfednet/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "pfednet/config.hpp"
#include "pfednet/error.hpp"
#include "pfednet/io.hpp"
#include "pfednet/train.hpp"

namespace pfednet {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

RunSummary summarize_run(const std::string& run_dir) {
  namespace fs = std::filesystem;
  RunSummary s;
  s.run_dir = run_dir;

  const auto run = load_json_file((fs::path(run_dir) / "run.json").string());
  if (!run.contains("config")) {
    throw Error(ErrorCode::kParse, run_dir + "/run.json: missing field 'config'");
  }
  const RunConfig cfg = RunConfig::from_json(run.at("config"));
  s.gamma = cfg.cer.gamma;
  s.lambda = cfg.train.lambda;

  const std::string csv_path = (fs::path(run_dir) / "metrics.csv").string();
  std::stringstream csv(read_text_file(csv_path));
  std::string line;
  std::getline(csv, line);
  if (line != "round,client_id,accuracy,objective,uplink_bytes,downlink_bytes") {
    throw Error(ErrorCode::kParse, csv_path + ": unexpected header '" + line + "'");
  }
  bool found = false;
  int line_no = 1;
  while (std::getline(csv, line)) {
    ++line_no;
    const auto cells = split_csv_line(line);
    if (cells.size() != 6) {
      throw Error(ErrorCode::kParse, csv_path + ":" + std::to_string(line_no) +
                                         ": expected 6 columns, got " +
                                         std::to_string(cells.size()));
    }
    if (cells[0] != "final" || cells[1] != "mean") continue;
    try {
      s.mean_accuracy = std::stod(cells[2]);
      s.uplink_bytes = std::stoull(cells[4]);
      s.downlink_bytes = std::stoull(cells[5]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParse,
                  csv_path + ":" + std::to_string(line_no) + ": malformed number");
    }
    found = true;
  }
  if (!found) throw Error(ErrorCode::kParse, csv_path + ": no 'final,mean' row");

  const auto checkpoint =
      checkpoint_from_json(load_json_file((fs::path(run_dir) / "checkpoint.json").string()));
  s.max_pairwise_gap = max_pairwise_gap(checkpoint.z);
  return s;
}

ReportKey parse_report_key(const std::string& text) {
  if (text == "gamma") return ReportKey::kGamma;
  if (text == "lambda") return ReportKey::kLambda;
  throw_invalid("report key must be 'gamma' or 'lambda', got '" + text + "'");
}

std::string report_csv(std::vector<RunSummary> runs, ReportKey key) {
  if (runs.empty()) throw_invalid("report needs at least one run");
  auto key_of = [key](const RunSummary& r) {
    return key == ReportKey::kGamma ? r.gamma : r.lambda;
  };
  std::stable_sort(runs.begin(), runs.end(),
                   [&](const RunSummary& a, const RunSummary& b) { return key_of(a) < key_of(b); });
  const double baseline = static_cast<double>(runs.front().uplink_bytes);

  std::ostringstream out;
  out << (key == ReportKey::kGamma ? "gamma" : "lambda")
      << ",mean_acc,uplink_bytes,downlink_bytes,reduction_pct";
  if (key == ReportKey::kLambda) out << ",max_pairwise_gap";
  out << '\n';
  for (const auto& r : runs) {
    const double reduction =
        baseline > 0.0 ? 100.0 * (1.0 - static_cast<double>(r.uplink_bytes) / baseline) : 0.0;
    out << fmt(key_of(r)) << ',' << fmt(r.mean_accuracy) << ',' << r.uplink_bytes << ','
        << r.downlink_bytes << ',' << fmt(reduction);
    if (key == ReportKey::kLambda) out << ',' << fmt(r.max_pairwise_gap);
    out << '\n';
  }
  return out.str();
}

}  // namespace pfednet
