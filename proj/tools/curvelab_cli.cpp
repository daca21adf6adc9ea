// Command-line experiment runner.  Each subcommand assembles a config object
// from an optional JSON config file plus flag overrides, dispatches through
// run_experiment, prints the check table, and writes a JSONL record stream
// next to a JSON summary.  Exit codes: 0 all checks pass, 1 tolerance
// failure, 2 config error, 3 budget refusal.
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "curvelab/common.hpp"
#include "curvelab/drivers.hpp"
#include "curvelab/report.hpp"

namespace {

using curvelab::Json;

// Options registered through this helper write into the config object only
// when the user actually passed them, so config-file values and driver
// defaults survive untouched otherwise.
class ConfigBinder {
 public:
  ConfigBinder(CLI::App* app, Json* config) : app_(app), config_(config) {}

  void num(const std::string& flag, const std::string& key,
           const std::string& help) {
    auto val = std::make_shared<double>();
    app_->add_option(flag, *val, help)->each([this, key, val](std::string) {
      (*config_)[key] = *val;
    });
  }

  void integer(const std::string& flag, const std::string& key,
               const std::string& help) {
    auto val = std::make_shared<std::int64_t>();
    app_->add_option(flag, *val, help)->each([this, key, val](std::string) {
      (*config_)[key] = *val;
    });
  }

  void str(const std::string& flag, const std::string& key,
           const std::string& help) {
    auto val = std::make_shared<std::string>();
    app_->add_option(flag, *val, help)->each([this, key, val](std::string) {
      (*config_)[key] = *val;
    });
  }

  void toggle(const std::string& flag, const std::string& key,
              const std::string& help) {
    app_->add_flag(flag, help)->each(
        [this, key](std::string) { (*config_)[key] = true; });
  }

  void int_list(const std::string& flag, const std::string& key,
                const std::string& help) {
    auto val = std::make_shared<std::vector<std::int64_t>>();
    app_->add_option(flag, *val, help)->each([this, key, val](std::string) {
      (*config_)[key] = *val;
    });
  }

  // "LO:HI" exponent pair expanded to the log2-lo / log2-hi fields.
  void log2_range(const std::string& flag, const std::string& help) {
    auto val = std::make_shared<std::string>();
    app_->add_option(flag, *val, help)->each([this, val](std::string) {
      auto colon = val->find(':');
      if (colon == std::string::npos)
        throw CLI::ValidationError("range must look like LO:HI, e.g. 6:10");
      (*config_)["log2-lo"] = std::stoi(val->substr(0, colon));
      (*config_)["log2-hi"] = std::stoi(val->substr(colon + 1));
    });
  }

 private:
  CLI::App* app_;
  Json* config_;
};

struct SubcommandState {
  Json config = Json::object();
  std::string config_path;
  std::string out_base;
  bool csv = false;
};

void print_checks(const curvelab::ExperimentReport& rep) {
  for (const curvelab::ToleranceCheck& c : rep.checks()) {
    if (c.spread > 0.0)
      std::printf("%-42s %14.8g +- %-10.4g in [%g, %g]  %s\n", c.name.c_str(),
                  c.value, c.spread, c.lo, c.hi, c.pass ? "pass" : "FAIL");
    else
      std::printf("%-42s %14.8g               in [%g, %g]  %s\n",
                  c.name.c_str(), c.value, c.lo, c.hi,
                  c.pass ? "pass" : "FAIL");
  }
}

int run_subcommand(SubcommandState& st, const std::string& name) {
  if (!st.config_path.empty()) {
    Json file_config = curvelab::load_json_file(st.config_path);
    if (!file_config.is_object())
      throw curvelab::config_error("config file must hold a JSON object");
    // Flag overrides already sit in st.config; file values fill the rest.
    for (const auto& [k, v] : file_config.items())
      if (!st.config.contains(k)) st.config[k] = v;
  }
  st.config["subcommand"] = name;
  curvelab::ExperimentReport rep = curvelab::run_experiment(st.config);
  print_checks(rep);
  std::string base = st.out_base.empty() ? name + "-report" : st.out_base;
  rep.write(base);
  if (st.csv) rep.write_csv(base + ".csv");
  std::printf("%zu records -> %s.jsonl, summary -> %s.json%s\n",
              rep.records().size(), base.c_str(), base.c_str(),
              st.csv ? ", csv exported" : "");
  std::printf("%s\n", rep.all_pass() ? "PASS" : "FAIL");
  return rep.all_pass() ? 0 : 1;
}

int run_replay(const std::string& report_path, bool have_seed,
               std::int64_t seed, const std::string& out_base) {
  Json summary = curvelab::load_json_file(report_path);
  if (!summary.contains("config"))
    throw curvelab::config_error("summary has no config echo");
  Json config = summary.at("config");
  if (have_seed) {
    if (!config.contains("seed"))
      throw curvelab::config_error(
          "stored config has no seed field to override");
    config["seed"] = seed;
  }
  curvelab::ExperimentReport rep = curvelab::run_experiment(config);
  curvelab::ReplayComparison cmp;
  if (have_seed) {
    cmp = curvelab::compare_statistical(summary, rep.checks());
    std::printf("statistical comparison over %lld checks: %s\n",
                static_cast<long long>(cmp.checks_compared),
                cmp.match ? "consistent" : "DIVERGENT");
  } else {
    std::string records_path = report_path;
    auto slash = records_path.find_last_of('/');
    std::string dir =
        slash == std::string::npos ? "" : records_path.substr(0, slash + 1);
    std::string records_file =
        summary.at("records_file").get<std::string>();
    std::vector<Json> expected = curvelab::load_jsonl_file(dir + records_file);
    cmp = curvelab::compare_records(expected, rep.records());
    std::printf("record comparison over %lld records: %s\n",
                static_cast<long long>(cmp.records_compared),
                cmp.match ? "identical" : "DIVERGENT");
    if (!cmp.match && cmp.first_divergent >= 0)
      std::printf("first divergent record: %lld\n",
                  static_cast<long long>(cmp.first_divergent));
  }
  if (!cmp.match) std::printf("detail: %s\n", cmp.detail.c_str());
  if (!out_base.empty()) rep.write(out_base);
  return cmp.match ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Numerical experiments on averaging operators over nondegenerate "
      "curves"};
  app.require_subcommand(1);

  std::vector<std::pair<std::string, std::string>> descriptions = {
      {"decay", "Multiplier magnitude along a frequency ray"},
      {"geometry", "Cone root solver and size-relation ratios"},
      {"decompose-audit", "Symbol decomposition reconstruction and supports"},
      {"lorentz", "Rescaling identities for cone tuples"},
      {"decouple", "Empirical decoupling ratios over region families"},
      {"operator-probe", "Dyadic operator norm probes on the torus"},
      {"sharpness", "Lower-bound examples: bump, random packets, separation"},
  };

  std::vector<std::unique_ptr<SubcommandState>> states;
  std::vector<std::pair<CLI::App*, SubcommandState*>> dispatch;

  for (auto& [name, help] : descriptions) {
    CLI::App* sub = app.add_subcommand(name, help);
    states.push_back(std::make_unique<SubcommandState>());
    SubcommandState* st = states.back().get();
    sub->add_option("--config", st->config_path,
                    "JSON config file; flags override its fields");
    sub->add_option("--out", st->out_base,
                    "output basename (default <subcommand>-report)");
    sub->add_flag("--csv", st->csv, "also export records as CSV");
    ConfigBinder bind(sub, &st->config);
    bind.num("--budget-bytes", "budget-bytes",
             "memory budget override in bytes");

    if (name == "decay") {
      bind.integer("--n", "n", "ambient dimension");
      bind.str("--curve", "curve", "moment | perturbed-a | perturbed-b | perturbed-c");
      bind.str("--ray", "ray", "frequency ray e1..en");
      bind.log2_range("--lambda-range", "log2 lambda range LO:HI");
      bind.integer("--log2-lo", "log2-lo", "lowest log2 lambda");
      bind.integer("--log2-hi", "log2-hi", "highest log2 lambda");
      bind.integer("--per-octave", "per-octave", "sample points per octave");
      bind.num("--plateau", "plateau", "cutoff plateau half-width");
      bind.num("--support", "support", "cutoff support half-width");
      bind.num("--expect-slope", "expect-slope", "gate: fitted slope target");
      bind.num("--slope-tol", "slope-tol", "slope tolerance");
      bind.num("--gate-log2", "gate-log2", "gate: log2 lambda for magnitude cap");
      bind.num("--max-abs", "max-abs", "gate: magnitude cap");
    } else if (name == "geometry") {
      bind.integer("--n", "n", "ambient dimension (4)");
      bind.integer("--draws", "draws", "admissible draws per curve");
      bind.integer("--seed", "seed", "rng seed");
      bind.num("--spread", "spread", "transverse coordinate range");
      bind.num("--ratio-lo", "ratio-lo", "lower ratio gate");
      bind.num("--ratio-hi", "ratio-hi", "upper ratio gate");
    } else if (name == "decompose-audit") {
      bind.integer("--J", "J", "tree dimension, 3 or 4");
      bind.integer("--k", "k", "dyadic shell exponent");
      bind.num("--rho", "rho", "ladder depth parameter");
      bind.num("--eps", "eps", "narrowed-window parameter");
      bind.integer("--samples", "samples", "audit sample count");
      bind.integer("--seed", "seed", "rng seed");
      bind.str("--curve", "curve", "curve name");
      bind.num("--max-reconstruction", "max-reconstruction",
               "partition-of-unity defect cap");
      bind.num("--max-box-constant", "max-box-constant",
               "support box calibration cap");
    } else if (name == "lorentz") {
      bind.integer("--n", "n", "ambient dimension");
      bind.integer("--d", "d", "cone dimension (0: all of 2..n-1)");
      bind.integer("--draws", "draws", "random parameter draws");
      bind.integer("--seed", "seed", "rng seed");
      bind.num("--max-residual", "max-residual", "identity residual cap");
    } else if (name == "decouple") {
      bind.str("--family", "family", "frenet-box | slab | plate");
      bind.integer("--n", "n", "grid dimension");
      bind.integer("--d", "d", "region family order");
      bind.num("--p", "p", "Lebesgue exponent");
      bind.integer("--grid", "grid", "per-axis grid size");
      bind.integer("--scales", "scales", "number of dyadic scales");
      bind.integer("--trials", "trials", "random coefficient draws per scale");
      bind.integer("--seed", "seed", "rng seed");
      bind.num("--lambda", "lambda", "frequency scale (default 0.7 Nyquist)");
      bind.integer("--K", "K", "plate truncation parameter");
      bind.num("--max-growth", "max-growth", "l2 ratio growth exponent cap");
    } else if (name == "operator-probe") {
      bind.integer("--n", "n", "grid dimension");
      bind.integer("--grid", "grid", "per-axis grid size");
      bind.num("--p", "p", "Lebesgue exponent");
      bind.integer("--k-lo", "k-lo", "lowest dyadic band");
      bind.integer("--k-hi", "k-hi", "highest dyadic band");
      bind.integer("--probes", "probes", "random probes per band");
      bind.integer("--seed", "seed", "rng seed");
      bind.num("--nodes-per-osc", "nodes-per-osc",
               "multiplier quadrature density");
      bind.num("--expect-slope", "expect-slope", "gate: fitted slope target");
      bind.num("--slope-tol", "slope-tol", "slope tolerance");
      bind.num("--max-slope", "max-slope", "gate: slope upper cap");
      bind.toggle("--monotone", "monotone",
                  "gate: best ratios decrease with k");
    } else if (name == "sharpness") {
      bind.str("--example", "example", "bump | wolff | separation");
      bind.integer("--n", "n", "dimension");
      bind.integer("--grid", "grid", "per-axis grid size");
      bind.num("--p", "p", "Lebesgue exponent");
      bind.log2_range("--lambda-range", "log2 lambda range LO:HI");
      bind.integer("--log2-lo", "log2-lo", "lowest log2 lambda");
      bind.integer("--log2-hi", "log2-hi", "highest log2 lambda");
      bind.integer("--trials", "trials", "random draws per scale");
      bind.num("--epsilon", "epsilon", "packet index window factor");
      bind.num("--rho", "rho", "packet radius factor");
      bind.integer("--seed", "seed", "rng seed");
      bind.num("--norm-slope-tol", "norm-slope-tol", "bump norm slope tolerance");
      bind.num("--ratio-slope-tol", "ratio-slope-tol",
               "bump ratio slope tolerance");
      bind.num("--exponent-tol", "exponent-tol",
               "packet-sum exponent tolerance");
      bind.num("--min-field", "min-field", "bump neighborhood lower gate");
      bind.int_list("--lambda-log2s", "lambda-log2s",
                    "separation scales (log2)");
      bind.num("--min-score", "min-score", "separation score gate");
    }
    dispatch.emplace_back(sub, st);
  }

  CLI::App* replay = app.add_subcommand(
      "replay", "Re-run a stored report and compare record-by-record");
  std::string report_path;
  std::int64_t replay_seed = 0;
  std::string replay_out;
  replay->add_option("report", report_path, "summary JSON path")->required();
  CLI::Option* seed_opt = replay->add_option(
      "--seed", replay_seed,
      "re-run under a different seed; compare statistically");
  replay->add_option("--out", replay_out, "write the re-run report here");

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto& [sub, st] : dispatch)
      if (sub->parsed()) return run_subcommand(*st, sub->get_name());
    if (replay->parsed())
      return run_replay(report_path, seed_opt->count() > 0, replay_seed,
                        replay_out);
  } catch (const curvelab::budget_error& e) {
    std::fprintf(stderr, "budget refusal: %s\n", e.what());
    return 3;
  } catch (const curvelab::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
