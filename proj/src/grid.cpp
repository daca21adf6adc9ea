#include "curvelab/grid.hpp"

#include <fftw3.h>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <sstream>

#include "curvelab/oscillatory.hpp"
#include "curvelab/quadrature.hpp"
#include "curvelab/rng.hpp"

namespace curvelab {

namespace {

constexpr std::int64_t kReductionChunk = 65536;

void validate_spec(const GridSpec& spec) {
  if (spec.n < 2 || spec.n > 4)
    throw config_error("grid dimension must lie in {2, 3, 4}");
  if (spec.N < 4 || (spec.N & (spec.N - 1)) != 0)
    throw config_error("grid size per axis must be a power of two >= 4");
  if (!(spec.period > 0.0)) throw config_error("grid period must be positive");
}

// Deterministic sum: fixed-size chunks accumulated in parallel, combined
// serially in chunk order, so results are independent of thread count.
template <typename F>
double chunked_sum(std::int64_t count, F&& term) {
  std::int64_t chunks = (count + kReductionChunk - 1) / kReductionChunk;
  std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < chunks; ++c) {
    std::int64_t lo = c * kReductionChunk;
    std::int64_t hi = std::min(count, lo + kReductionChunk);
    double acc = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) acc += term(i);
    partial[c] = acc;
  }
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

struct PlanKey {
  int n;
  int N;
  int sign;
  bool operator<(const PlanKey& o) const {
    return std::tie(n, N, sign) < std::tie(o.n, o.N, o.sign);
  }
};

std::mutex plan_mutex;
std::map<PlanKey, fftw_plan> plan_cache;

fftw_plan get_plan(const GridSpec& spec, int sign) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  PlanKey key{spec.n, spec.N, sign};
  auto it = plan_cache.find(key);
  if (it != plan_cache.end()) return it->second;
  std::vector<int> dims(spec.n, spec.N);
  std::vector<cplx> scratch(spec.samples());
  fftw_plan plan = fftw_plan_dft(
      spec.n, dims.data(), reinterpret_cast<fftw_complex*>(scratch.data()),
      reinterpret_cast<fftw_complex*>(scratch.data()), sign,
      FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plan) throw convergence_error("transform planning failed");
  plan_cache.emplace(key, plan);
  return plan;
}

void execute_fft(PeriodicField& f, int sign) {
  fftw_plan plan = get_plan(f.spec, sign);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(f.data.data()),
                   reinterpret_cast<fftw_complex*>(f.data.data()));
}

// Index sets per axis with |freq| <= limit (all indices if limit < 0).
std::vector<int> allowed_indices(const GridSpec& spec, int limit) {
  std::vector<int> idx;
  for (int i = 0; i < spec.N; ++i) {
    if (limit < 0 || std::abs(spec.freq_of(i)) <= limit) idx.push_back(i);
  }
  return idx;
}

double curve_reach(const Curve& c, const Cutoff& chi) {
  double reach = 0.0;
  for (int i = -100; i <= 100; ++i) {
    double s = chi.support() * i / 100.0;
    reach = std::max(reach, c(s).cwiseAbs().maxCoeff());
  }
  return reach;
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

}  // namespace

std::int64_t GridSpec::samples() const {
  std::int64_t total = 1;
  for (int i = 0; i < n; ++i) total *= N;
  return total;
}

std::int64_t grid_budget_bytes(const GridSpec& spec) {
  return 8 * spec.samples();
}

std::int64_t budget_limit_bytes() {
  const char* env = std::getenv(kBudgetEnv);
  if (!env) return kDefaultBudgetBytes;
  char* end = nullptr;
  long long v = std::strtoll(env, &end, 10);
  if (end == env || v <= 0)
    throw config_error("budget variable must be a positive byte count");
  return v;
}

void check_grid_budget(const GridSpec& spec) {
  validate_spec(spec);
  std::int64_t need = grid_budget_bytes(spec);
  std::int64_t limit = budget_limit_bytes();
  std::ostringstream msg;
  msg << "grid of " << spec.N << "^" << spec.n << " samples needs "
      << need << " bytes (" << std::fixed;
  msg.precision(1);
  msg << need / 1073741824.0 << " GiB)";
  if (need >= limit) {
    msg << "; budget is " << limit << " bytes";
    throw budget_error(msg.str());
  }
  if (spec.n == 4 && spec.N > 64) {
    msg << "; 4D runs are capped at 64 per axis";
    throw budget_error(msg.str());
  }
}

PeriodicField::PeriodicField(GridSpec s, Side sd) : spec(s), side(sd) {
  check_grid_budget(spec);
  data.assign(spec.samples(), cplx(0.0, 0.0));
}

std::int64_t PeriodicField::flat(const std::array<int, 4>& idx) const {
  std::int64_t f = 0;
  for (int a = 0; a < spec.n; ++a) f = f * spec.N + idx[a];
  return f;
}

void PeriodicField::freq_at(std::int64_t flat_idx, Vec& out) const {
  out.resize(spec.n);
  double scale = 2.0 * kPi / spec.period;
  for (int a = spec.n - 1; a >= 0; --a) {
    int i = static_cast<int>(flat_idx % spec.N);
    flat_idx /= spec.N;
    out[a] = scale * spec.freq_of(i);
  }
}

void fft_forward(PeriodicField& f) {
  if (f.side != Side::physical)
    throw config_error("forward transform expects a physical-side field");
  execute_fft(f, FFTW_FORWARD);
  double w = std::pow(f.spec.cell(), f.spec.n);
  std::int64_t count = f.size();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < count; ++i) f.data[i] *= w;
  f.side = Side::frequency;
}

void fft_inverse(PeriodicField& f) {
  if (f.side != Side::frequency)
    throw config_error("inverse transform expects a frequency-side field");
  execute_fft(f, FFTW_BACKWARD);
  double w = 1.0 / std::pow(f.spec.period, f.spec.n);
  std::int64_t count = f.size();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < count; ++i) f.data[i] *= w;
  f.side = Side::physical;
}

PeriodicField to_frequency(const PeriodicField& f) {
  PeriodicField out = f;
  if (out.side == Side::physical) fft_forward(out);
  return out;
}

PeriodicField to_physical(const PeriodicField& f) {
  PeriodicField out = f;
  if (out.side == Side::frequency) fft_inverse(out);
  return out;
}

PeriodicField apply_multiplier(const PeriodicField& f,
                               const std::function<cplx(const Vec&)>& m) {
  if (f.side != Side::physical)
    throw config_error("multiplier application expects a physical-side field");
  PeriodicField out = f;
  fft_forward(out);
  std::int64_t count = out.size();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < count; ++i) {
    Vec k;
    out.freq_at(i, k);
    out.data[i] *= m(k);
  }
  fft_inverse(out);
  return out;
}

PeriodicField apply_multiplier_table(const PeriodicField& f,
                                     const std::vector<cplx>& table) {
  if (f.side != Side::physical)
    throw config_error("multiplier application expects a physical-side field");
  if (static_cast<std::int64_t>(table.size()) != f.size())
    throw config_error("multiplier table size must match the lattice");
  PeriodicField out = f;
  fft_forward(out);
  std::int64_t count = out.size();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < count; ++i) out.data[i] *= table[i];
  fft_inverse(out);
  return out;
}

double lp_norm(const PeriodicField& f, double p) {
  if (f.side != Side::physical)
    throw config_error("norms are computed on physical-side fields");
  if (!(p >= 1.0)) throw config_error("norm exponent must satisfy p >= 1");
  std::int64_t count = f.size();
  if (std::isinf(p)) {
    std::int64_t chunks = (count + kReductionChunk - 1) / kReductionChunk;
    std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < chunks; ++c) {
      std::int64_t lo = c * kReductionChunk;
      std::int64_t hi = std::min(count, lo + kReductionChunk);
      double m = 0.0;
      for (std::int64_t i = lo; i < hi; ++i)
        m = std::max(m, std::abs(f.data[i]));
      partial[c] = m;
    }
    double m = 0.0;
    for (double v : partial) m = std::max(m, v);
    return m;
  }
  double cellw = std::pow(f.spec.cell(), f.spec.n);
  double total = chunked_sum(
      count, [&](std::int64_t i) { return std::pow(std::abs(f.data[i]), p); });
  return std::pow(cellw * total, 1.0 / p);
}

double sobolev_norm(const PeriodicField& f, double p, double alpha) {
  if (alpha < 0.0) throw config_error("Sobolev order must be >= 0");
  PeriodicField g = apply_multiplier(f, [alpha](const Vec& k) {
    return cplx(std::pow(1.0 + k.squaredNorm(), alpha / 2.0), 0.0);
  });
  return lp_norm(g, p);
}

double l2_norm_frequency(const PeriodicField& f) {
  if (f.side != Side::frequency)
    throw config_error("frequency-route norm expects a frequency-side field");
  double total = chunked_sum(f.size(), [&](std::int64_t i) {
    return std::norm(f.data[i]);
  });
  return std::sqrt(total / std::pow(f.spec.period, f.spec.n));
}

std::vector<cplx> mu_hat_lattice(const Curve& c, const Cutoff& chi,
                                 const GridSpec& spec, int box_limit,
                                 double nodes_per_osc) {
  validate_spec(spec);
  const int n = spec.n;
  if (c.dim() != n) throw config_error("curve dimension must match the grid");
  double scale = 2.0 * kPi / spec.period;
  int eff_limit = box_limit < 0 ? spec.N / 2 : std::min(box_limit, spec.N / 2);
  double lambda_max =
      scale * eff_limit * std::sqrt(static_cast<double>(n)) + 1.0;
  MuHatBatch batch = mu_hat_batch_nodes(c, chi, lambda_max, nodes_per_osc);
  const int Q = static_cast<int>(batch.s.size());

  std::vector<int> axis_idx = allowed_indices(spec, box_limit);
  const int A = static_cast<int>(axis_idx.size());

  std::vector<cplx> acc(spec.samples(), cplx(0.0, 0.0));
  // rows = combinations of the leading n-1 axes over allowed indices
  std::int64_t rows = 1;
  for (int a = 0; a + 1 < n; ++a) rows *= A;

  std::vector<cplx> table(static_cast<std::size_t>(n) * spec.N);
  for (int q = 0; q < Q; ++q) {
    double coeff = batch.chiw[q];
    if (coeff == 0.0) continue;
    for (int a = 0; a < n; ++a) {
      double ga = batch.gamma_nodes(a, q) * scale;
      for (int i : axis_idx)
        table[a * spec.N + i] = std::polar(1.0, -ga * spec.freq_of(i));
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t row = 0; row < rows; ++row) {
      std::int64_t rem = row;
      std::int64_t base = 0;
      cplx prefix(coeff, 0.0);
      for (int a = n - 2; a >= 0; --a) {
        int i = axis_idx[rem % A];
        rem /= A;
        prefix *= table[a * spec.N + i];
        std::int64_t stride = 1;
        for (int b = a + 1; b < n; ++b) stride *= spec.N;
        base += i * stride;
      }
      const cplx* last = &table[(n - 1) * static_cast<std::size_t>(spec.N)];
      for (int i : axis_idx) acc[base + i] += prefix * last[i];
    }
  }
  return acc;
}

PeriodicField averaging_operator(const Curve& c, const Cutoff& chi,
                                 const PeriodicField& f,
                                 const AveragingOptions& opt) {
  if (f.side != Side::physical)
    throw config_error("averaging operator expects a physical-side field");
  const GridSpec& spec = f.spec;
  if (c.dim() != spec.n)
    throw config_error("curve dimension must match the grid");
  double reach = curve_reach(c, chi);
  if (reach > spec.period / 4.0)
    throw domain_error("curve leaves the quarter-period cell; averages would wrap");

  if (opt.backend == AveragingBackend::multiplier) {
    std::vector<cplx> table =
        mu_hat_lattice(c, chi, spec, opt.box_limit);
    return apply_multiplier_table(f, table);
  }

  // Direct backend: spectral refinement then multilinear interpolation.
  if (opt.upsample < 1 || (opt.upsample & (opt.upsample - 1)) != 0)
    throw config_error("upsample factor must be a power of two >= 1");
  GridSpec fine = spec;
  fine.N = spec.N * opt.upsample;
  check_grid_budget(fine);
  PeriodicField ff = to_frequency(f);
  PeriodicField fup(fine, Side::frequency);
  const int n = spec.n;
  std::array<int, 4> idx{};
  for (std::int64_t i = 0; i < ff.size(); ++i) {
    std::int64_t rem = i;
    std::array<int, 4> up{};
    for (int a = n - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % spec.N);
      rem /= spec.N;
      int k = spec.freq_of(idx[a]);
      up[a] = k >= 0 ? k : k + fine.N;
    }
    fup.data[fup.flat(up)] = ff.data[i];
  }
  fft_inverse(fup);

  const QuadRule& rule = gauss_legendre(opt.panel_nodes);
  double lo = -chi.support(), hi = chi.support();
  std::vector<double> sq, wq;
  for (int panel = 0; panel < opt.panels; ++panel) {
    double a = lo + (hi - lo) * panel / opt.panels;
    double b = lo + (hi - lo) * (panel + 1) / opt.panels;
    for (int i = 0; i < opt.panel_nodes; ++i) {
      double s = 0.5 * (a + b) + 0.5 * (b - a) * rule.x[i];
      sq.push_back(s);
      wq.push_back(0.5 * (b - a) * rule.w[i] * chi(s));
    }
  }
  const int Q = static_cast<int>(sq.size());
  Eigen::MatrixXd gamma_q(n, Q);
  for (int q = 0; q < Q; ++q) gamma_q.col(q) = c(sq[q]);

  PeriodicField out(spec, Side::physical);
  const double cell = spec.cell();
  const double fine_cell = fine.cell();
  std::int64_t count = out.size();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < count; ++i) {
    std::int64_t rem = i;
    std::array<int, 4> xi{};
    for (int a = n - 1; a >= 0; --a) {
      xi[a] = static_cast<int>(rem % spec.N);
      rem /= spec.N;
    }
    cplx acc(0.0, 0.0);
    for (int q = 0; q < Q; ++q) {
      // fine-lattice coordinates of x - gamma(s_q)
      double frac[4];
      int base_idx[4];
      for (int a = 0; a < n; ++a) {
        double y = (xi[a] * cell - gamma_q(a, q)) / fine_cell;
        double fl = std::floor(y);
        frac[a] = y - fl;
        std::int64_t cellidx = static_cast<std::int64_t>(fl) % fine.N;
        if (cellidx < 0) cellidx += fine.N;
        base_idx[a] = static_cast<int>(cellidx);
      }
      cplx val(0.0, 0.0);
      for (int corner = 0; corner < (1 << n); ++corner) {
        double w = 1.0;
        std::array<int, 4> ci{};
        for (int a = 0; a < n; ++a) {
          if (corner & (1 << a)) {
            w *= frac[a];
            ci[a] = (base_idx[a] + 1) % fine.N;
          } else {
            w *= 1.0 - frac[a];
            ci[a] = base_idx[a];
          }
        }
        val += w * fup.data[fup.flat(ci)];
      }
      acc += wq[q] * val;
    }
    out.data[i] = acc;
  }
  return out;
}

namespace {

// One-axis profile of the smooth spatial bump: Fourier transform of the
// unit-normalized bump, evaluated by fixed quadrature (real and even).
double bump_profile_ft(double t) {
  const QuadRule& rule = gauss_legendre(64);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i)
    acc += rule.w[i] * bump(rule.x[i]) * std::cos(t * rule.x[i]);
  return acc;
}

constexpr double kBumpWidth = 0.05;  // spatial support radius of the bump

}  // namespace

PeriodicField bump_field(const GridSpec& spec, double lambda) {
  validate_spec(spec);
  if (!(lambda >= 1.0)) throw config_error("bump scale must satisfy lambda >= 1");
  double scale = 2.0 * kPi / spec.period;
  if (2.0 * lambda > scale * (spec.N / 2))
    throw domain_error("bump support exceeds the lattice Nyquist frequency");
  PeriodicField f(spec, Side::frequency);
  const int n = spec.n;
  // per-axis table of the spatial-profile transform at width/lambda
  std::vector<double> axis_table(spec.N);
  for (int i = 0; i < spec.N; ++i)
    axis_table[i] =
        bump_profile_ft(kBumpWidth * scale * spec.freq_of(i) / lambda);
  double amp = std::pow(lambda, -static_cast<double>(n));
  std::int64_t count = f.size();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < count; ++i) {
    std::int64_t rem = i;
    double k2 = 0.0;
    double prod = 1.0;
    for (int a = n - 1; a >= 0; --a) {
      int ii = static_cast<int>(rem % spec.N);
      rem /= spec.N;
      double k = scale * spec.freq_of(ii);
      k2 += k * k;
      prod *= axis_table[ii];
    }
    double shell = dyadic_band(std::sqrt(k2) / lambda, 0);
    // band 0 peaks at radius 1 and is supported on [1/2, 2]
    if (shell != 0.0) f.data[i] = amp * shell * prod;
  }
  fft_inverse(f);
  return f;
}

ProbeRatios dyadic_probe_band(const Curve& c, const Cutoff& chi,
                              const GridSpec& spec, int k,
                              const ProbeOptions& opt) {
  validate_spec(spec);
  double scale = 2.0 * kPi / spec.period;
  if ((std::int64_t{1} << (k + 1)) > scale * (spec.N / 2))
    throw domain_error("band 2^{k+1} exceeds the lattice Nyquist frequency");
  const int n = spec.n;
  int box = static_cast<int>(std::ceil((std::int64_t{1} << (k + 1)) / scale));
  std::vector<cplx> mu = mu_hat_lattice(c, chi, spec, box, opt.nodes_per_osc);

  // fused band-filtered averaging table: band_k(|xi|) mu_hat(xi)
  std::vector<cplx> table(mu.size());
  std::vector<double> bandw(mu.size());
  {
    PeriodicField probe(spec, Side::frequency);
    std::int64_t count = probe.size();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) {
      Vec kv;
      probe.freq_at(i, kv);
      double b = dyadic_band(kv.norm(), k);
      bandw[i] = b;
      table[i] = b * mu[i];
    }
  }

  ProbeRatios out;
  out.k = k;
  out.p = opt.p;

  // (a) random Gaussian fields band-limited to the dyadic shell
  for (int trial = 0; trial < opt.gaussian_trials; ++trial) {
    PeriodicField f(spec, Side::frequency);
    Rng rng(opt.seed, 1000 + 31 * k + trial);
    for (std::int64_t i = 0; i < f.size(); ++i) {
      if (bandw[i] == 0.0) continue;
      f.data[i] = bandw[i] * cplx(rng.gauss(), rng.gauss());
    }
    fft_inverse(f);
    double denom = lp_norm(f, opt.p);
    if (denom == 0.0) continue;
    PeriodicField af = apply_multiplier_table(f, table);
    out.gaussian_max = std::max(out.gaussian_max, lp_norm(af, opt.p) / denom);
  }

  // (b) modulated bump concentrated at frequency radius 2^k
  {
    PeriodicField f = bump_field(spec, std::exp2(k));
    double denom = lp_norm(f, opt.p);
    PeriodicField af = apply_multiplier_table(f, table);
    out.bump = lp_norm(af, opt.p) / denom;
  }

  // (c) phase-conjugate focusing field near the dominant-axis cone
  {
    Cutoff cone_window(0.15, 0.3);
    PeriodicField f(spec, Side::frequency);
    std::int64_t count = f.size();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) {
      if (bandw[i] == 0.0) continue;
      Vec kv;
      f.freq_at(i, kv);
      double last = kv[n - 1];
      if (!(last > 0.0)) continue;
      double ratio = kv.head(n - 1).cwiseAbs().maxCoeff() / last;
      double w = cone_window(ratio);
      if (w == 0.0) continue;
      cplx m = mu[i];
      double mag = std::abs(m);
      if (mag < 1e-6) continue;
      f.data[i] = bandw[i] * w * std::conj(m) / mag;
    }
    fft_inverse(f);
    double denom = lp_norm(f, opt.p);
    if (denom > 0.0) {
      PeriodicField af = apply_multiplier_table(f, table);
      out.focusing = lp_norm(af, opt.p) / denom;
    }
  }

  out.best = std::max({out.gaussian_max, out.bump, out.focusing});
  return out;
}

OperatorProbeReport dyadic_operator_probe(const Curve& c, const Cutoff& chi,
                                          const GridSpec& spec, int k_lo,
                                          int k_hi, const ProbeOptions& opt) {
  if (k_hi - k_lo + 1 < 4)
    throw config_error("slope fit needs at least 4 dyadic bands");
  OperatorProbeReport report;
  report.p = opt.p;
  std::vector<double> xs, ys;
  for (int k = k_lo; k <= k_hi; ++k) {
    ProbeRatios row = dyadic_probe_band(c, chi, spec, k, opt);
    report.rows.push_back(row);
    xs.push_back(k);
    ys.push_back(std::log2(row.best));
  }
  report.slope = ols_slope(xs, ys);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= ys.size();
  double sxx = 0.0, sse = 0.0;
  double intercept = my - report.slope * mx;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    double res = ys[i] - report.slope * xs[i] - intercept;
    sse += res * res;
  }
  if (xs.size() > 2)
    report.slope_stderr = std::sqrt(sse / (xs.size() - 2) / sxx);
  return report;
}

}  // namespace curvelab
