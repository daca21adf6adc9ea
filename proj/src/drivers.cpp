#include "curvelab/drivers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "curvelab/cone.hpp"
#include "curvelab/cutoffs.hpp"
#include "curvelab/decouple.hpp"
#include "curvelab/grid.hpp"
#include "curvelab/oscillatory.hpp"
#include "curvelab/plates.hpp"
#include "curvelab/rng.hpp"
#include "curvelab/sharpness.hpp"
#include "curvelab/symbols.hpp"

namespace curvelab {

namespace {

// Validated field access over a flat config object.  Rejects unknown keys so
// typos are reported by name; `echo` collects the resolved values.
class Fields {
 public:
  Fields(const Json& j, std::vector<std::string> allowed)
      : j_(j), allowed_(std::move(allowed)) {
    if (!j.is_object()) throw config_error("config must be a JSON object");
    for (const auto& [k, v] : j.items()) {
      (void)v;
      if (k == "subcommand") continue;
      bool ok = false;
      for (const std::string& a : allowed_) ok = ok || a == k;
      if (!ok) throw config_error("unknown config field: " + k);
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  double num(const char* key, double def) {
    double v = def;
    if (j_.contains(key)) {
      if (!j_.at(key).is_number())
        throw config_error(std::string("field ") + key + " must be a number");
      v = j_.at(key).get<double>();
    }
    echo_[key] = v;
    return v;
  }

  int integer(const char* key, int def) {
    int v = def;
    if (j_.contains(key)) {
      if (!j_.at(key).is_number_integer())
        throw config_error(std::string("field ") + key +
                           " must be an integer");
      v = j_.at(key).get<int>();
    }
    echo_[key] = v;
    return v;
  }

  std::uint64_t seed(const char* key, std::uint64_t def) {
    std::uint64_t v = def;
    if (j_.contains(key)) {
      if (!j_.at(key).is_number_integer())
        throw config_error(std::string("field ") + key +
                           " must be an integer");
      v = j_.at(key).get<std::uint64_t>();
    }
    echo_[key] = v;
    return v;
  }

  std::string str(const char* key, const char* def) {
    std::string v = def;
    if (j_.contains(key)) {
      if (!j_.at(key).is_string())
        throw config_error(std::string("field ") + key + " must be a string");
      v = j_.at(key).get<std::string>();
    }
    echo_[key] = v;
    return v;
  }

  bool flag(const char* key, bool def) {
    bool v = def;
    if (j_.contains(key)) {
      if (!j_.at(key).is_boolean())
        throw config_error(std::string("field ") + key + " must be a boolean");
      v = j_.at(key).get<bool>();
    }
    echo_[key] = v;
    return v;
  }

  // Optional numeric gate: records the value in the echo only when present.
  bool optional_num(const char* key, double* out) {
    if (!j_.contains(key)) return false;
    if (!j_.at(key).is_number())
      throw config_error(std::string("field ") + key + " must be a number");
    *out = j_.at(key).get<double>();
    echo_[key] = *out;
    return true;
  }

  std::vector<int> int_list(const char* key, std::vector<int> def) {
    std::vector<int> v = std::move(def);
    if (j_.contains(key)) {
      const Json& a = j_.at(key);
      if (!a.is_array())
        throw config_error(std::string("field ") + key +
                           " must be an array of integers");
      v.clear();
      for (const Json& e : a) {
        if (!e.is_number_integer())
          throw config_error(std::string("field ") + key +
                             " must be an array of integers");
        v.push_back(e.get<int>());
      }
    }
    echo_[key] = v;
    return v;
  }

  Json echo(const std::string& subcommand) const {
    Json e = Json::object();
    e["subcommand"] = subcommand;
    for (const auto& [k, v] : echo_.items()) e[k] = v;
    return e;
  }

 private:
  const Json& j_;
  std::vector<std::string> allowed_;
  Json echo_ = Json::object();
};

// Applies a per-experiment byte-budget override through the environment
// variable the grid gate reads, restoring the previous value on scope exit so
// experiments run in one process stay independent.
class BudgetOverride {
 public:
  explicit BudgetOverride(Fields& f) {
    double bytes = 0.0;
    if (!f.optional_num("budget-bytes", &bytes)) return;
    if (!(bytes >= 1))
      throw config_error("field budget-bytes must be a positive byte count");
    const char* prev = std::getenv(kBudgetEnv);
    had_prev_ = prev != nullptr;
    if (had_prev_) prev_ = prev;
    active_ = true;
    std::string v = std::to_string(static_cast<long long>(bytes));
    setenv(kBudgetEnv, v.c_str(), 1);
  }
  ~BudgetOverride() {
    if (!active_) return;
    if (had_prev_)
      setenv(kBudgetEnv, prev_.c_str(), 1);
    else
      unsetenv(kBudgetEnv);
  }
  BudgetOverride(const BudgetOverride&) = delete;
  BudgetOverride& operator=(const BudgetOverride&) = delete;

 private:
  bool active_ = false;
  bool had_prev_ = false;
  std::string prev_;
};

int ray_axis(const std::string& ray, int n) {
  if (ray == "en") return n;
  if (ray.size() == 2 && ray[0] == 'e' && ray[1] >= '1' && ray[1] <= '9') {
    int axis = ray[1] - '0';
    if (axis >= 1 && axis <= n) return axis;
  }
  throw config_error("field ray must be e1..e" + std::to_string(n) + " or en");
}

// ---------------------------------------------------------------------------

ExperimentReport run_decay(const Json& j) {
  Fields f(j, {"n", "curve", "ray", "log2-lo", "log2-hi", "per-octave",
               "plateau", "support", "expect-slope", "slope-tol", "gate-log2",
               "max-abs"});
  int n = f.integer("n", 4);
  std::string curve_name = f.str("curve", "moment");
  std::string ray = f.str("ray", "en");
  int lo = f.integer("log2-lo", 8);
  int hi = f.integer("log2-hi", 16);
  int per_octave = f.integer("per-octave", 1);
  double plateau = f.num("plateau", 0.5);
  double support = f.num("support", 1.0);
  double expect_slope = 0.0;
  bool gate_slope = f.optional_num("expect-slope", &expect_slope);
  double slope_tol = f.num("slope-tol", 0.03);
  double gate_log2 = 0.0;
  bool has_gate = f.optional_num("gate-log2", &gate_log2);
  double max_abs = 0.0;
  bool has_max = f.optional_num("max-abs", &max_abs);
  if (lo >= hi) throw config_error("field log2-lo must be below log2-hi");
  if (per_octave < 1)
    throw config_error("field per-octave must be a positive integer");

  ExperimentReport rep("decay", f.echo("decay"));
  CurvePtr c = make_named_curve(curve_name, n);
  Cutoff chi(plateau, support);
  int axis = ray_axis(ray, n);

  std::vector<std::pair<double, double>> pairs;
  int points = (hi - lo) * per_octave;
  for (int i = 0; i <= points; ++i) {
    double lambda = std::exp2(lo + static_cast<double>(i) / per_octave);
    Vec xi = Vec::Zero(n);
    xi[axis - 1] = lambda;
    cplx v = eval_mu_hat(*c, chi, xi);
    double mag = std::abs(v);
    rep.add_record(Json{{"lambda", lambda},
                        {"re", v.real()},
                        {"im", v.imag()},
                        {"abs", mag}});
    if (mag > 0.0) pairs.emplace_back(std::log(lambda), std::log(mag));
  }
  if (gate_slope) {
    FitResult fit = exponent_fit(pairs);
    rep.check("decay-slope", fit.slope, expect_slope - slope_tol,
              expect_slope + slope_tol);
    rep.note("slope-stderr", fit.slope_stderr);
  }
  if (has_gate || has_max) {
    if (!(has_gate && has_max))
      throw config_error(
          "fields gate-log2 and max-abs must be supplied together");
    Vec xi = Vec::Zero(n);
    xi[axis - 1] = std::exp2(gate_log2);
    double mag = std::abs(eval_mu_hat(*c, chi, xi));
    rep.check("magnitude-gate", mag, 0.0, max_abs);
  }
  return rep;
}

// ---------------------------------------------------------------------------

ExperimentReport run_geometry(const Json& j) {
  Fields f(j, {"n", "draws", "seed", "spread", "ratio-lo", "ratio-hi"});
  int n = f.integer("n", 4);
  int draws = f.integer("draws", 10000);
  std::uint64_t seed = f.seed("seed", 1);
  double spread = f.num("spread", 0.3);
  double ratio_lo = f.num("ratio-lo", 0.1);
  double ratio_hi = f.num("ratio-hi", 10.0);
  if (n != 4) throw config_error("field n must be 4 for the geometry audit");
  if (draws < 1) throw config_error("field draws must be positive");

  ExperimentReport rep("geometry", f.echo("geometry"));
  const char* names[] = {"moment", "perturbed-a", "perturbed-b", "perturbed-c"};
  for (int ci = 0; ci < 4; ++ci) {
    CurvePtr c = make_named_curve(names[ci], n);
    Rng rng(seed, 10 + ci);
    double r1_min = 1e300, r1_max = 0.0;
    double r2_min = 1e300, r2_max = 0.0;
    double r3_min = 1e300, r3_max = 0.0;
    int residual_failures = 0;
    for (int t = 0; t < draws; ++t) {
      Vec xi(n);
      ConeRoots roots;
      bool admissible = false;
      do {
        for (int a = 0; a < n - 1; ++a) xi[a] = rng.uniform(-spread, spread);
        xi[n - 1] = 1.0;
        try {
          roots = cone_roots(*c, xi);
          admissible = roots.has_theta1 && !roots.degenerate;
        } catch (const domain_error&) {
          admissible = false;
        }
      } while (!admissible);
      double tol = 1e-12 * xi.norm();
      if (roots.residual_theta2 > tol || roots.residual_theta1 > tol)
        ++residual_failures;
      double u2m = std::abs(roots.u2);
      double r1 = std::abs(roots.theta1_plus - roots.theta1_minus) /
                  std::sqrt(u2m);
      double denom = u2m * std::sqrt(u2m);
      double r2p = std::abs(roots.u12 - roots.u1_plus) / denom;
      double r2m = std::abs(roots.u12 - roots.u1_minus) / denom;
      double r3 = std::abs(roots.u1_plus - roots.u1_minus) / denom;
      r1_min = std::min(r1_min, r1);
      r1_max = std::max(r1_max, r1);
      r2_min = std::min({r2_min, r2p, r2m});
      r2_max = std::max({r2_max, r2p, r2m});
      r3_min = std::min(r3_min, r3);
      r3_max = std::max(r3_max, r3);
      rep.add_record(Json{{"curve", names[ci]},
                          {"xi1", xi[0]},
                          {"xi2", xi[1]},
                          {"xi3", xi[2]},
                          {"theta2", roots.theta2},
                          {"theta1m", roots.theta1_minus},
                          {"theta1p", roots.theta1_plus},
                          {"u2", roots.u2},
                          {"u12", roots.u12},
                          {"u1m", roots.u1_minus},
                          {"u1p", roots.u1_plus},
                          {"ratio-i", r1},
                          {"ratio-ii-plus", r2p},
                          {"ratio-ii-minus", r2m},
                          {"ratio-iii", r3}});
    }
    std::string base = names[ci];
    rep.check(base + ":ratio-i:min", r1_min, ratio_lo, ratio_hi);
    rep.check(base + ":ratio-i:max", r1_max, ratio_lo, ratio_hi);
    rep.check(base + ":ratio-ii:min", r2_min, ratio_lo, ratio_hi);
    rep.check(base + ":ratio-ii:max", r2_max, ratio_lo, ratio_hi);
    rep.check(base + ":ratio-iii:min", r3_min, ratio_lo, ratio_hi);
    rep.check(base + ":ratio-iii:max", r3_max, ratio_lo, ratio_hi);
    rep.check(base + ":residual-failures", residual_failures, 0, 0);
  }
  return rep;
}

// ---------------------------------------------------------------------------

ExperimentReport run_decompose(const Json& j) {
  Fields f(j, {"J", "k", "rho", "eps", "samples", "seed", "curve",
               "max-reconstruction", "max-box-constant"});
  int J = f.integer("J", 3);
  int k = f.integer("k", 8);
  double rho = f.num("rho", 0.05);
  double eps = f.num("eps", 0.1);
  int samples = f.integer("samples", 1000);
  std::uint64_t seed = f.seed("seed", 1);
  std::string curve_name = f.str("curve", "moment");
  double max_rec = f.num("max-reconstruction", 1e-12);
  double max_box = 0.0;
  bool gate_box = f.optional_num("max-box-constant", &max_box);
  if (J != 3 && J != 4) throw config_error("field J must be 3 or 4");
  if (k < 1) throw config_error("field k must be a positive integer");
  if (samples < 1) throw config_error("field samples must be positive");

  ExperimentReport rep("decompose-audit", f.echo("decompose-audit"));
  DecompositionAudit audit;
  if (J == 3) {
    CurvePtr c = make_named_curve(curve_name, 3);
    J3Options opt;
    opt.rho = rho;
    opt.eps = eps;
    J3Decomposition dec(
        c, make_cone_window_base(3, 3, k, 0.1, 0.2, Cutoff(0.25, 0.5)), k,
        opt);
    audit = j3_audit(dec, samples, seed);
  } else {
    CurvePtr c = make_named_curve(curve_name, 4);
    J4Options opt;
    opt.rho = rho;
    opt.eps = eps;
    J4Decomposition dec(
        c, make_cone_window_base(4, 4, k, 0.08, 0.16, Cutoff(0.25, 0.5)), k,
        opt);
    audit = j4_audit(dec, samples, seed);
  }
  Json rec = Json{{"J", J},
                  {"k", k},
                  {"reconstruction", audit.max_reconstruction_error},
                  {"box-constant", audit.max_box_constant},
                  {"points", audit.points},
                  {"pieces", audit.pieces},
                  {"max-angular-terms", audit.max_angular_terms}};
  if (J == 4) {
    rec["box-constant-b"] = audit.max_box_constant_b;
    rec["box-constant-b-rescaled"] = audit.max_box_constant_b_rescaled;
    rec["box-constant-b-straddling"] = audit.max_box_constant_b_straddling;
    rec["b-pieces-resolved"] = audit.b_pieces_resolved;
    rec["b-pieces-straddling"] = audit.b_pieces_straddling;
    rec["b-third-ratio-min"] = audit.b_third_ratio_min;
    rec["b-third-ratio-max"] = audit.b_third_ratio_max;
  }
  rep.add_record(std::move(rec));
  rep.check("reconstruction", audit.max_reconstruction_error, 0.0, max_rec);
  if (gate_box)
    rep.check("box-constant", audit.max_box_constant, 0.0, max_box);
  return rep;
}

// ---------------------------------------------------------------------------

ExperimentReport run_lorentz(const Json& j) {
  Fields f(j, {"n", "d", "draws", "seed", "max-residual"});
  int n = f.integer("n", 4);
  int d = f.integer("d", 0);  // 0: alternate over 2..n-1
  int draws = f.integer("draws", 1000);
  std::uint64_t seed = f.seed("seed", 1);
  double max_res = f.num("max-residual", 1e-9);
  if (n < 3) throw config_error("field n must be at least 3");
  if (d != 0 && (d < 2 || d > n - 1))
    throw config_error("field d must be 0 or in [2, n-1]");
  if (draws < 1) throw config_error("field draws must be positive");

  ExperimentReport rep("lorentz", f.echo("lorentz"));
  auto base = std::make_shared<MomentCurve>(n);
  std::vector<int> ds;
  if (d != 0)
    ds.push_back(d);
  else
    for (int q = 2; q <= n - 1; ++q) ds.push_back(q);
  std::vector<std::unique_ptr<ConeTuple>> tuples;
  for (int q : ds) tuples.push_back(std::make_unique<ConeTuple>(base, q));

  Rng rng(seed, 77);
  double worst_matrix = 0.0, worst_curve = 0.0;
  for (int t = 0; t < draws; ++t) {
    int qi = t % static_cast<int>(ds.size());
    const ConeTuple& tuple = *tuples[qi];
    int m = n - ds[qi];
    Vec a(m);
    a[0] = rng.uniform(0.3, 1.8);
    for (int i = 1; i < m; ++i) a[i] = rng.uniform(-1.5, 1.5);
    double b = rng.uniform(-0.15, 0.15);
    double rho_draw = rng.uniform(0.3, 0.9);
    double x = rng.uniform(-0.25, 0.25);
    double s = b + rho_draw * x;
    double r = rho_draw * rng.uniform(0.15, 1.0);
    LorentzResiduals res = lorentz_identity_check(tuple, a, b, rho_draw, s, r);
    worst_matrix = std::max(worst_matrix, res.matrix_identity);
    worst_curve = std::max(worst_curve, res.curve_identity);
    rep.add_record(Json{{"d", ds[qi]},
                        {"b", b},
                        {"rho", rho_draw},
                        {"s", s},
                        {"r", r},
                        {"matrix-residual", res.matrix_identity},
                        {"curve-residual", res.curve_identity}});
  }
  rep.check("max-matrix-residual", worst_matrix, 0.0, max_res);
  rep.check("max-curve-residual", worst_curve, 0.0, max_res);
  return rep;
}

// ---------------------------------------------------------------------------

ExperimentReport run_decouple(const Json& j) {
  Fields f(j, {"family", "n", "d", "p", "grid", "scales", "trials", "seed",
               "lambda", "K", "max-growth", "budget-bytes"});
  BudgetOverride budget(f);
  std::string family = f.str("family", "frenet-box");
  int n = f.integer("n", 3);
  int d = f.integer("d", 2);
  double p = f.num("p", 6.0);
  int grid = f.integer("grid", 128);
  int scales = f.integer("scales", 5);
  int trials = f.integer("trials", 32);
  std::uint64_t seed = f.seed("seed", 1);
  double lambda = f.num("lambda", 0.0);
  int K = f.integer("K", 4);
  double max_growth = f.num("max-growth", 0.2);
  if (family != "frenet-box" && family != "slab" && family != "plate")
    throw config_error("field family must be frenet-box, slab, or plate");
  if (scales < 1) throw config_error("field scales must be positive");

  ExperimentReport rep("decouple", f.echo("decouple"));
  GridSpec spec;
  spec.n = n;
  spec.N = grid;
  check_grid_budget(spec);
  double freq_scale = 2.0 * kPi / spec.period;
  if (lambda <= 0.0) lambda = 0.7 * freq_scale * (spec.N / 2);

  std::vector<std::pair<double, std::vector<FrequencyRegion>>> ladder;
  auto curve = std::make_shared<MomentCurve>(n);
  std::unique_ptr<ConeTuple> tuple;
  if (family == "plate") tuple = std::make_unique<ConeTuple>(curve, d);
  for (int l = 1; l <= scales; ++l) {
    double r = std::ldexp(1.0, -l);
    if (family == "frenet-box")
      ladder.emplace_back(r, frame_box_regions(curve, d, r, lambda));
    else if (family == "slab") {
      if (n != d)
        throw config_error(
            "field d must equal n for the slab family (planar slabs)");
      ladder.emplace_back(r, slab_regions(curve, r, lambda));
    } else {
      Vec a = Vec::Zero(n - d);
      a[0] = 1.0;
      ladder.emplace_back(r, plate_regions(*tuple, a, K, r, lambda));
    }
  }

  DecouplingTrialSpec ts;
  ts.gaussian_trials = trials;
  ts.seed = seed;
  std::vector<std::pair<double, double>> l2_med, l2_max;
  for (auto& [r, regions] : ladder) {
    ScaleRatios sr = decoupling_scale_ratios(regions, p, spec, ts);
    sr.r = r;
    Json scale_rec = Json{{"kind", "scale"},
                          {"r", r},
                          {"regions", sr.regions},
                          {"occupied", sr.occupied},
                          {"modes", sr.modes},
                          {"lp-median", sr.lp_median},
                          {"lp-max", sr.lp_max},
                          {"l2-median", sr.l2_median},
                          {"l2-max", sr.l2_max},
                          {"lp-bound", sr.lp_trivial_bound},
                          {"l2-bound", sr.l2_trivial_bound}};
    if (!sr.empty_labels.empty()) scale_rec["empty"] = sr.empty_labels;
    rep.add_record(std::move(scale_rec));
    for (std::size_t t = 0; t < sr.lp_ratios.size(); ++t) {
      bool focusing = ts.focusing && t + 1 == sr.lp_ratios.size();
      rep.add_record(Json{{"kind", "trial"},
                          {"r", r},
                          {"trial", static_cast<int>(t)},
                          {"focusing", focusing},
                          {"lp-ratio", sr.lp_ratios[t]},
                          {"l2-ratio", sr.l2_ratios[t]}});
    }
    char name[64];
    std::snprintf(name, sizeof name, "trivial-bound:r=2^-%d",
                  static_cast<int>(std::lround(std::log2(1.0 / r))));
    rep.check(std::string(name) + ":lp", sr.lp_max, 0.0,
              sr.lp_trivial_bound * (1.0 + 1e-6));
    rep.check(std::string(name) + ":l2", sr.l2_max, 0.0,
              sr.l2_trivial_bound * (1.0 + 1e-6));
    l2_med.emplace_back(std::log(1.0 / r), std::log(sr.l2_median));
    l2_max.emplace_back(std::log(1.0 / r), std::log(sr.l2_max));
  }
  if (scales >= 4) {
    FitResult med_fit = exponent_fit(l2_med);
    FitResult max_fit = exponent_fit(l2_max);
    rep.check("l2-median-growth", med_fit.slope, -100.0, max_growth,
              med_fit.slope_stderr);
    rep.note("l2-max-growth", max_fit.slope);
    rep.note("l2-max-growth-stderr", max_fit.slope_stderr);
  }
  return rep;
}

// ---------------------------------------------------------------------------

ExperimentReport run_probe(const Json& j) {
  Fields f(j, {"n", "grid", "p", "k-lo", "k-hi", "probes", "seed",
               "nodes-per-osc", "expect-slope", "slope-tol", "max-slope",
               "monotone", "budget-bytes"});
  BudgetOverride budget(f);
  int n = f.integer("n", 2);
  int grid = f.integer("grid", 2048);
  double p = f.num("p", 4.0);
  int k_lo = f.integer("k-lo", 4);
  int k_hi = f.integer("k-hi", 9);
  int probes = f.integer("probes", 6);
  std::uint64_t seed = f.seed("seed", 1);
  double nodes_per_osc = f.num("nodes-per-osc", 24.0);
  double expect_slope = 0.0;
  bool gate_slope = f.optional_num("expect-slope", &expect_slope);
  double slope_tol = f.num("slope-tol", 0.1);
  double max_slope = 0.0;
  bool gate_max = f.optional_num("max-slope", &max_slope);
  bool monotone = f.flag("monotone", false);
  if (k_lo > k_hi) throw config_error("field k-lo must not exceed k-hi");

  ExperimentReport rep("operator-probe", f.echo("operator-probe"));
  GridSpec spec;
  spec.n = n;
  spec.N = grid;
  auto c = std::make_shared<MomentCurve>(n);
  Cutoff chi(0.25, 0.5);
  ProbeOptions opt;
  opt.p = p;
  opt.gaussian_trials = probes;
  opt.seed = seed;
  opt.nodes_per_osc = nodes_per_osc;
  OperatorProbeReport pr = dyadic_operator_probe(*c, chi, spec, k_lo, k_hi, opt);
  for (const ProbeRatios& row : pr.rows)
    rep.add_record(Json{{"k", row.k},
                        {"gaussian-max", row.gaussian_max},
                        {"bump", row.bump},
                        {"focusing", row.focusing},
                        {"best", row.best}});
  rep.note("slope", pr.slope);
  rep.note("slope-stderr", pr.slope_stderr);
  if (gate_slope)
    rep.check("probe-slope", pr.slope, expect_slope - slope_tol,
              expect_slope + slope_tol, pr.slope_stderr);
  if (gate_max)
    rep.check("probe-slope-cap", pr.slope, -100.0, max_slope,
              pr.slope_stderr);
  if (monotone) {
    double worst_step = -1e300;
    for (std::size_t i = 1; i < pr.rows.size(); ++i)
      worst_step =
          std::max(worst_step, pr.rows[i].best - pr.rows[i - 1].best);
    rep.check("ratio-monotone-decrease", worst_step, -1e300, 0.0);
  }
  return rep;
}

// ---------------------------------------------------------------------------

ExperimentReport run_sharpness(const Json& j) {
  Fields f(j, {"example", "n", "grid", "p", "log2-lo", "log2-hi", "trials",
               "epsilon", "rho", "seed", "norm-slope-tol", "ratio-slope-tol",
               "exponent-tol", "min-field", "lambda-log2s", "min-score",
               "budget-bytes"});
  BudgetOverride budget(f);
  std::string example = f.str("example", "bump");
  if (example == "bump") {
    int n = f.integer("n", 2);
    int grid = f.integer("grid", 4096);
    double p = f.num("p", 1.5);
    int lo = f.integer("log2-lo", 4);
    int hi = f.integer("log2-hi", 9);
    double norm_tol = f.num("norm-slope-tol", 0.05);
    double ratio_tol = f.num("ratio-slope-tol", 0.1);
    double min_field = f.num("min-field", 0.05);
    ExperimentReport rep("sharpness", f.echo("sharpness"));
    GridSpec spec;
    spec.n = n;
    spec.N = grid;
    auto c = std::make_shared<MomentCurve>(n);
    Cutoff chi(0.25, 0.5);
    BumpSweep sw = bump_sweep(*c, chi, spec, lo, hi, p);
    double field_min = 1e300;
    for (const BumpReport& row : sw.rows) {
      field_min = std::min(field_min, row.neighborhood_min);
      rep.add_record(Json{{"lambda", row.lambda},
                          {"f-norm", row.f_norm},
                          {"af-norm", row.af_norm},
                          {"ratio", row.ratio},
                          {"neighborhood-min", row.neighborhood_min}});
    }
    double pprime = p / (p - 1.0);
    rep.check("norm-slope", sw.norm_fit.slope, -double(n) / p - norm_tol,
              -double(n) / p + norm_tol);
    rep.check("ratio-slope", sw.ratio_fit.slope, -1.0 / pprime - ratio_tol,
              -1.0 / pprime + ratio_tol);
    rep.check("field-lower-bound", field_min, min_field, 1e300);
    return rep;
  }
  if (example == "wolff") {
    int n = f.integer("n", 2);
    int grid = f.integer("grid", 4096);
    double p = f.num("p", 6.0);
    int lo = f.integer("log2-lo", 6);
    int hi = f.integer("log2-hi", 10);
    int trials = f.integer("trials", 32);
    double epsilon = f.num("epsilon", 0.45);
    double rho = f.num("rho", 0.25);
    std::uint64_t seed = f.seed("seed", 1);
    double exp_tol = f.num("exponent-tol", 0.05);
    ExperimentReport rep("sharpness", f.echo("sharpness"));
    GridSpec spec;
    spec.n = n;
    spec.N = grid;
    MomentCurve c(n);
    WolffOptions opt;
    opt.epsilon = epsilon;
    opt.rho = rho;
    opt.p = p;
    opt.trials = trials;
    opt.seed = seed;
    WolffSweep sw = wolff_sweep(c, spec, lo, hi, opt);
    for (const WolffReport& row : sw.rows) {
      rep.add_record(Json{{"kind", "scale"},
                          {"lambda", row.lambda},
                          {"packets", row.packets},
                          {"modes", static_cast<std::int64_t>(row.modes)},
                          {"expectation-norm", row.expectation_norm},
                          {"expectation-stderr", row.expectation_stderr},
                          {"median-norm", row.median_norm}});
      for (std::size_t t = 0; t < row.trial_norms.size(); ++t)
        rep.add_record(Json{{"kind", "trial"},
                            {"lambda", row.lambda},
                            {"trial", static_cast<int>(t)},
                            {"norm", row.trial_norms[t]}});
    }
    double expect = 1.0 - 1.0 / p + 1.0 / (2.0 * n);
    rep.check("khinchine-exponent", sw.fit.slope, expect - exp_tol,
              expect + exp_tol, sw.fit.slope_stderr);
    return rep;
  }
  if (example == "separation") {
    int n = f.integer("n", 4);
    std::vector<int> lambdas = f.int_list("lambda-log2s", {8, 12});
    double epsilon = f.num("epsilon", 0.1);
    double min_score = f.num("min-score", 0.5);
    ExperimentReport rep("sharpness", f.echo("sharpness"));
    MomentCurve c(n);
    double worst = 1e300;
    for (int e : lambdas) {
      double lambda = std::exp2(e);
      SeparationReport sr = separation_audit(c, lambda, epsilon);
      worst = std::min(worst, sr.score);
      rep.add_record(Json{{"lambda", lambda},
                          {"score", sr.score},
                          {"effective-epsilon", sr.effective_epsilon},
                          {"widened", sr.widened},
                          {"packets", sr.packet_count}});
    }
    rep.check("separation-score", worst, min_score, 1e300);
    return rep;
  }
  throw config_error("field example must be bump, wolff, or separation");
}

}  // namespace

CurvePtr make_named_curve(const std::string& name, int n) {
  if (n < 2 || n > 6) throw config_error("field n must lie in [2, 6]");
  if (name == "moment") return std::make_shared<MomentCurve>(n);
  std::vector<PerturbationTerm> terms;
  if (name == "perturbed-a")
    terms.push_back({PerturbationTerm::kSinMinusTaylor, n, 0.01, 1.0, 0, n});
  else if (name == "perturbed-b")
    terms.push_back(
        {PerturbationTerm::kCosMinusTaylor, n > 2 ? n - 1 : n, 0.008, 1.3, 0,
         n});
  else if (name == "perturbed-c")
    terms.push_back({PerturbationTerm::kMonomial, 2, 0.005, 1.0, n + 1, 0});
  else
    throw config_error("field curve: unknown curve name '" + name + "'");
  return std::make_shared<PerturbedCurve>(n, std::move(terms));
}

ExperimentReport run_experiment(const Json& config) {
  if (!config.is_object() || !config.contains("subcommand"))
    throw config_error("config must be an object with a subcommand field");
  std::string sub = config.at("subcommand").get<std::string>();
  if (sub == "decay") return run_decay(config);
  if (sub == "geometry") return run_geometry(config);
  if (sub == "decompose-audit") return run_decompose(config);
  if (sub == "lorentz") return run_lorentz(config);
  if (sub == "decouple") return run_decouple(config);
  if (sub == "operator-probe") return run_probe(config);
  if (sub == "sharpness") return run_sharpness(config);
  throw config_error("unknown subcommand: " + sub);
}

}  // namespace curvelab
