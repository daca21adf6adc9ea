#include "curvelab/report.hpp"

#include <sys/resource.h>

#include <cmath>
#include <fstream>
#include <sstream>

namespace curvelab {

namespace {

std::int64_t peak_rss_bytes() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return static_cast<std::int64_t>(usage.ru_maxrss) * 1024;
}

std::string base_name(const std::string& path) {
  std::size_t slash = path.find_last_of('/');
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

bool numbers_close(double a, double b, double tol) {
  double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= tol * scale;
}

// Compare two JSON values; numeric leaves use `tol`, everything else must be
// identical.  On mismatch, writes a path-qualified description.
bool json_close(const Json& a, const Json& b, double tol, std::string path,
                std::string* detail) {
  if (a.is_number() && b.is_number()) {
    double x = a.get<double>(), y = b.get<double>();
    if (!numbers_close(x, y, tol)) {
      *detail = path + ": " + a.dump() + " vs " + b.dump();
      return false;
    }
    return true;
  }
  if (a.type() != b.type()) {
    *detail = path + ": type " + std::string(a.type_name()) + " vs " +
              std::string(b.type_name());
    return false;
  }
  if (a.is_object()) {
    if (a.size() != b.size()) {
      *detail = path + ": object size " + std::to_string(a.size()) + " vs " +
                std::to_string(b.size());
      return false;
    }
    for (const auto& [k, v] : a.items()) {
      if (!b.contains(k)) {
        *detail = path + ": missing key " + k;
        return false;
      }
      if (!json_close(v, b.at(k), tol, path + "." + k, detail)) return false;
    }
    return true;
  }
  if (a.is_array()) {
    if (a.size() != b.size()) {
      *detail = path + ": array size " + std::to_string(a.size()) + " vs " +
                std::to_string(b.size());
      return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!json_close(a[i], b[i], tol, path + "[" + std::to_string(i) + "]",
                      detail))
        return false;
    return true;
  }
  if (a != b) {
    *detail = path + ": " + a.dump() + " vs " + b.dump();
    return false;
  }
  return true;
}

}  // namespace

ExperimentReport::ExperimentReport(std::string subcommand, Json config)
    : subcommand_(std::move(subcommand)),
      config_(std::move(config)),
      start_(std::chrono::steady_clock::now()) {}

void ExperimentReport::add_record(Json fields) {
  Json rec = Json::object();
  rec["seq"] = static_cast<std::int64_t>(records_.size());
  for (auto& [k, v] : fields.items()) rec[k] = std::move(v);
  records_.push_back(std::move(rec));
}

void ExperimentReport::check(const std::string& name, double value, double lo,
                             double hi, double spread) {
  ToleranceCheck c;
  c.name = name;
  c.value = value;
  c.lo = lo;
  c.hi = hi;
  c.spread = spread;
  c.pass = std::isfinite(value) && value >= lo && value <= hi;
  checks_.push_back(std::move(c));
}

void ExperimentReport::note(const std::string& key, Json value) {
  notes_[key] = std::move(value);
}

bool ExperimentReport::all_pass() const {
  for (const ToleranceCheck& c : checks_)
    if (!c.pass) return false;
  return true;
}

Json ExperimentReport::summary() const {
  Json s = Json::object();
  s["schema_version"] = kSchemaVersion;
  s["subcommand"] = subcommand_;
  s["config"] = config_;
  s["records"] = static_cast<std::int64_t>(records_.size());
  Json checks = Json::array();
  for (const ToleranceCheck& c : checks_) {
    Json jc = Json::object();
    jc["name"] = c.name;
    jc["value"] = c.value;
    jc["lo"] = c.lo;
    jc["hi"] = c.hi;
    if (c.spread > 0.0) jc["stderr"] = c.spread;
    jc["pass"] = c.pass;
    checks.push_back(std::move(jc));
  }
  s["checks"] = std::move(checks);
  if (!notes_.empty()) s["notes"] = notes_;
  double wall = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start_)
                    .count();
  s["stats"] = Json{{"wall_seconds", wall},
                    {"peak_rss_bytes", peak_rss_bytes()}};
  s["pass"] = all_pass();
  return s;
}

void ExperimentReport::write(const std::string& base) const {
  std::string jsonl_path = base + ".jsonl";
  {
    std::ofstream out(jsonl_path);
    if (!out) throw config_error("cannot open output file " + jsonl_path);
    for (const Json& rec : records_) out << rec.dump() << "\n";
  }
  Json s = summary();
  s["records_file"] = base_name(jsonl_path);
  std::string json_path = base + ".json";
  std::ofstream out(json_path);
  if (!out) throw config_error("cannot open output file " + json_path);
  out << s.dump(2) << "\n";
}

void ExperimentReport::write_csv(const std::string& path) const {
  std::vector<std::string> columns;
  for (const Json& rec : records_)
    for (const auto& [k, v] : rec.items()) {
      if (v.is_array() || v.is_object()) continue;
      bool seen = false;
      for (const std::string& c : columns) seen = seen || c == k;
      if (!seen) columns.push_back(k);
    }
  std::ofstream out(path);
  if (!out) throw config_error("cannot open output file " + path);
  for (std::size_t i = 0; i < columns.size(); ++i)
    out << (i ? "," : "") << columns[i];
  out << "\n";
  for (const Json& rec : records_) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) out << ",";
      if (rec.contains(columns[i])) {
        const Json& v = rec.at(columns[i]);
        if (v.is_string())
          out << v.get<std::string>();
        else
          out << v.dump();
      }
    }
    out << "\n";
  }
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open file " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error("parse error in " + path + ": " + e.what());
  }
}

std::vector<Json> load_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open file " + path);
  std::vector<Json> records;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      records.push_back(Json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw config_error("parse error in " + path + " line " +
                         std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

ReplayComparison compare_records(const std::vector<Json>& expected,
                                 const std::vector<Json>& actual, double tol) {
  ReplayComparison out;
  std::size_t n = std::min(expected.size(), actual.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::string detail;
    if (!json_close(expected[i], actual[i], tol, "record", &detail)) {
      out.match = false;
      out.first_divergent = static_cast<std::int64_t>(i);
      out.detail = detail;
      return out;
    }
    ++out.records_compared;
  }
  if (expected.size() != actual.size()) {
    out.match = false;
    out.first_divergent = static_cast<std::int64_t>(n);
    out.detail = "record count " + std::to_string(expected.size()) + " vs " +
                 std::to_string(actual.size());
  }
  return out;
}

ReplayComparison compare_statistical(const Json& expected_summary,
                                     const std::vector<ToleranceCheck>& actual) {
  ReplayComparison out;
  out.statistical = true;
  if (!expected_summary.contains("checks"))
    throw config_error("summary has no checks table");
  for (const Json& jc : expected_summary.at("checks")) {
    std::string name = jc.at("name").get<std::string>();
    double value = jc.at("value").get<double>();
    double spread = jc.contains("stderr") ? jc.at("stderr").get<double>() : 0.0;
    const ToleranceCheck* found = nullptr;
    for (const ToleranceCheck& c : actual)
      if (c.name == name) {
        found = &c;
        break;
      }
    if (!found) {
      out.match = false;
      out.detail = "check " + name + " missing from rerun";
      return out;
    }
    bool ok;
    if (spread > 0.0 || found->spread > 0.0) {
      double band = 6.0 * (spread + found->spread) + 1e-12 * std::abs(value);
      ok = std::abs(found->value - value) <= band;
    } else {
      // No stored variance: the reran value may sit anywhere in the admissible
      // band, so only the verdict is comparable across seeds.
      ok = found->pass == jc.at("pass").get<bool>();
    }
    if (!ok) {
      out.match = false;
      out.detail = "check " + name + ": " + std::to_string(value) + " vs " +
                   std::to_string(found->value);
      return out;
    }
    ++out.checks_compared;
  }
  return out;
}

}  // namespace curvelab
