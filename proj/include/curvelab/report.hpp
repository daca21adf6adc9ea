#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "curvelab/common.hpp"

namespace curvelab {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// One gated quantity.  `spread` carries the standard error when the value
// comes from randomized trials; deterministic checks use spread 0.  A check
// passes when lo <= value <= hi.
struct ToleranceCheck {
  std::string name;
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double spread = 0.0;
  bool pass = false;
};

// Accumulates per-unit records plus summary-level checks for one run.
// Records are JSON objects stamped with a sequence number in emission order;
// the summary embeds the config echo, schema version, check table, and
// wall-clock/peak-memory statistics.
class ExperimentReport {
 public:
  ExperimentReport(std::string subcommand, Json config);

  void add_record(Json fields);
  void check(const std::string& name, double value, double lo, double hi,
             double spread = 0.0);
  void note(const std::string& key, Json value);

  bool all_pass() const;
  Json summary() const;
  const std::vector<Json>& records() const { return records_; }
  const std::vector<ToleranceCheck>& checks() const { return checks_; }
  const Json& config() const { return config_; }
  const std::string& subcommand() const { return subcommand_; }

  // Writes <base>.jsonl and <base>.json; the summary names its record file.
  void write(const std::string& base) const;
  // Flat CSV of the records: union of keys in first-appearance order.
  void write_csv(const std::string& path) const;

 private:
  std::string subcommand_;
  Json config_;
  std::vector<Json> records_;
  std::vector<ToleranceCheck> checks_;
  Json notes_ = Json::object();
  std::chrono::steady_clock::time_point start_;
};

Json load_json_file(const std::string& path);
std::vector<Json> load_jsonl_file(const std::string& path);

struct ReplayComparison {
  bool match = true;
  bool statistical = false;
  std::int64_t first_divergent = -1;
  std::string detail;
  int records_compared = 0;
  int checks_compared = 0;
};

// Record-by-record comparison; numbers must agree within `tol` relative to
// max(1, magnitudes), everything else must be equal.
ReplayComparison compare_records(const std::vector<Json>& expected,
                                 const std::vector<Json>& actual,
                                 double tol = 1e-12);

/// Check-table comparison for reruns with a different seed: quantities with a
// stored spread must agree within 6 combined standard errors; quantities
// without one must reach the same verdict.
ReplayComparison compare_statistical(const Json& expected_summary,
                                     const std::vector<ToleranceCheck>& actual);

}  // namespace curvelab
