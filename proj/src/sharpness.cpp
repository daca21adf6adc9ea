#include "curvelab/sharpness.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "curvelab/cone.hpp"
#include "curvelab/oscillatory.hpp"
#include "curvelab/rng.hpp"

namespace curvelab {

namespace {

// Lattice modes inside one packet ball, with their window weights.
struct PacketModes {
  long nu = 0;
  std::vector<std::int64_t> flat;
  std::vector<double> weight;
};

// |z|^p from the squared modulus, with a multiply chain when p is an even
// integer.
double modulus_power(double sq, double p) {
  double half = p / 2.0;
  long m = std::lround(half);
  if (std::abs(half - m) < 1e-12 && m >= 1 && m <= 8) {
    double acc = sq;
    for (long i = 1; i < m; ++i) acc *= sq;
    return acc;
  }
  return std::pow(sq, half);
}

std::vector<PacketModes> packet_modes(const Curve& c, const GridSpec& spec,
                                      double lambda,
                                      const WolffOptions& opt) {
  const int n = spec.n;
  if (c.dim() != n) throw config_error("curve dimension must match the grid");
  double scale = 2.0 * kPi / spec.period;
  double radius = opt.rho * std::pow(lambda, 1.0 / n);
  long range = static_cast<long>(std::floor(opt.epsilon * std::pow(lambda, 1.0 / n)));
  Cutoff window(0.5, 1.0);

  std::vector<PacketModes> out;
  std::array<int, 4> lo{}, hi{};
  Vec k(n);
  for (long nu = -range; nu <= range; ++nu) {
    PacketCenter pc = packet_center(c, lambda, nu);
    for (int a = 0; a < n; ++a) {
      double center = pc.xi_nu[a] / scale;
      lo[a] = static_cast<int>(std::ceil(center - radius / scale));
      hi[a] = static_cast<int>(std::floor(center + radius / scale));
      if (lo[a] < -spec.N / 2 || hi[a] > spec.N / 2)
        throw config_error("packet centers exceed the lattice Nyquist range");
    }
    PacketModes pm;
    pm.nu = nu;
    std::array<int, 4> idx = lo;
    while (true) {
      for (int a = 0; a < n; ++a) k[a] = scale * idx[a];
      double w = window((k - pc.xi_nu).norm() / radius);
      if (w > 0.0) {
        std::array<int, 4> st{};
        for (int a = 0; a < n; ++a)
          st[a] = idx[a] >= 0 ? idx[a] : idx[a] + spec.N;
        std::int64_t f = 0;
        for (int a = 0; a < n; ++a) f = f * spec.N + st[a];
        pm.flat.push_back(f);
        pm.weight.push_back(w);
      }
      int a = n - 1;
      while (a >= 0 && ++idx[a] > hi[a]) {
        idx[a] = lo[a];
        --a;
      }
      if (a < 0) break;
    }
    out.push_back(std::move(pm));
  }

  // Exact lattice disjointness across packets.
  std::map<std::int64_t, long> owner;
  for (const PacketModes& pm : out)
    for (std::int64_t f : pm.flat) {
      auto [it, fresh] = owner.emplace(f, pm.nu);
      if (!fresh)
        throw config_error(
            "packet supports overlap on the lattice; use a smaller radius factor rho");
    }
  return out;
}

}  // namespace

FitResult exponent_fit(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 4)
    throw config_error("exponent fit needs at least 4 points");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pairs) {
    mx += x;
    my += y;
  }
  mx /= pairs.size();
  my /= pairs.size();
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pairs) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (!(sxx > 1e-12))
    throw config_error("exponent fit abscissae are degenerate");
  FitResult fit;
  fit.points = static_cast<int>(pairs.size());
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (const auto& [x, y] : pairs) {
    double r = y - fit.slope * x - fit.intercept;
    sse += r * r;
  }
  if (pairs.size() > 2)
    fit.slope_stderr = std::sqrt(sse / (pairs.size() - 2) / sxx);
  return fit;
}

BumpReport bump_example(const Curve& c, const Cutoff& chi,
                        const GridSpec& spec, double lambda, double p,
                        int neighborhood_samples) {
  double scale = 2.0 * kPi / spec.period;
  if (4.0 * lambda > scale * (spec.N / 2))
    throw domain_error("bump scale exceeds a quarter of the Nyquist frequency");
  BumpReport report;
  report.lambda = lambda;
  report.p = p;

  PeriodicField f = bump_field(spec, lambda);
  report.f_norm = lp_norm(f, p);

  int box = static_cast<int>(std::ceil(2.0 * lambda / scale)) + 1;
  std::vector<cplx> mu = mu_hat_lattice(c, chi, spec, box);
  PeriodicField af = apply_multiplier_table(f, mu);
  report.af_norm = lp_norm(af, p);
  report.ratio = report.af_norm / report.f_norm;

  // Exact mode-sum evaluation of A f at off-lattice points on the curve.
  // Fixed-chunk partial sums, combined serially, keep the result identical
  // across thread counts.
  PeriodicField afh = to_frequency(af);
  std::vector<std::int64_t> modes;
  for (std::int64_t i = 0; i < afh.size(); ++i)
    if (afh.data[i] != cplx(0.0, 0.0)) modes.push_back(i);
  double volume = std::pow(spec.period, spec.n);
  double worst = 1e300;
  const std::int64_t chunk = 65536;
  std::int64_t mcount = static_cast<std::int64_t>(modes.size());
  std::int64_t chunks = (mcount + chunk - 1) / chunk;
  std::vector<cplx> partial(chunks);
  for (int j = 0; j < neighborhood_samples; ++j) {
    double s = chi.plateau() * (2.0 * j / (neighborhood_samples - 1) - 1.0);
    Vec x = c(s);
#pragma omp parallel for schedule(static)
    for (std::int64_t cidx = 0; cidx < chunks; ++cidx) {
      std::int64_t lo = cidx * chunk;
      std::int64_t hi = std::min(mcount, lo + chunk);
      cplx local(0.0, 0.0);
      Vec k;
      for (std::int64_t m = lo; m < hi; ++m) {
        afh.freq_at(modes[m], k);
        local += afh.data[modes[m]] * std::polar(1.0, k.dot(x));
      }
      partial[cidx] = local;
    }
    cplx acc(0.0, 0.0);
    for (const cplx& v : partial) acc += v;
    worst = std::min(worst, std::abs(acc) / volume);
  }
  report.neighborhood_min = lambda * worst;
  return report;
}

BumpSweep bump_sweep(const Curve& c, const Cutoff& chi, const GridSpec& spec,
                     int log2_lambda_lo, int log2_lambda_hi, double p) {
  BumpSweep sweep;
  std::vector<std::pair<double, double>> norm_pairs, ratio_pairs;
  for (int e = log2_lambda_lo; e <= log2_lambda_hi; ++e) {
    double lambda = std::exp2(e);
    BumpReport row = bump_example(c, chi, spec, lambda, p);
    norm_pairs.emplace_back(std::log(lambda), std::log(row.f_norm));
    ratio_pairs.emplace_back(std::log(lambda), std::log(row.ratio));
    sweep.rows.push_back(row);
  }
  sweep.norm_fit = exponent_fit(norm_pairs);
  sweep.ratio_fit = exponent_fit(ratio_pairs);
  return sweep;
}

WolffReport wolff_example(const Curve& c, const GridSpec& spec, double lambda,
                          const WolffOptions& opt) {
  if (!(opt.p >= 1.0)) throw config_error("packet exponent must satisfy p >= 1");
  if (opt.trials < 1) throw config_error("packet trials must be >= 1");
  std::vector<PacketModes> packets = packet_modes(c, spec, lambda, opt);

  WolffReport report;
  report.lambda = lambda;
  report.packets = static_cast<int>(packets.size());
  for (const PacketModes& pm : packets) report.modes += pm.flat.size();
  report.trial_norms.assign(opt.trials, 0.0);

  // Trials own private fields; concurrency bounded so resident buffers stay
  // within the byte budget.
  std::int64_t field_bytes = 16 * spec.samples();
  int max_threads = omp_get_max_threads();
  int workers = static_cast<int>(
      std::clamp<std::int64_t>(budget_limit_bytes() / (2 * field_bytes) , 1,
                               max_threads));
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (int t = 0; t < opt.trials; ++t) {
    Rng rng(opt.seed, 400 + t);
    PeriodicField g(spec, Side::frequency);
    for (const PacketModes& pm : packets) {
      double sign = rng.rademacher();
      for (std::size_t i = 0; i < pm.flat.size(); ++i)
        g.data[pm.flat[i]] += sign * pm.weight[i];
    }
    fft_inverse(g);
    // serial per-sample accumulation; deterministic independent of workers
    double acc = 0.0;
    for (std::int64_t i = 0; i < g.size(); ++i)
      acc += modulus_power(std::norm(g.data[i]), opt.p);
    report.trial_norms[t] =
        std::pow(std::pow(spec.cell(), spec.n) * acc, 1.0 / opt.p);
  }

  double mean_pp = 0.0;
  for (double v : report.trial_norms) mean_pp += std::pow(v, opt.p);
  mean_pp /= opt.trials;
  report.expectation_norm = std::pow(mean_pp, 1.0 / opt.p);
  double var = 0.0;
  for (double v : report.trial_norms) {
    double d = std::pow(v, opt.p) - mean_pp;
    var += d * d;
  }
  if (opt.trials > 1) {
    var /= opt.trials - 1;
    double se_mean = std::sqrt(var / opt.trials);
    report.expectation_stderr =
        se_mean / opt.p * std::pow(mean_pp, 1.0 / opt.p - 1.0);
  }
  std::vector<double> sorted = report.trial_norms;
  std::sort(sorted.begin(), sorted.end());
  report.median_norm = sorted[sorted.size() / 2];
  return report;
}

WolffSweep wolff_sweep(const Curve& c, const GridSpec& spec, int log2_lambda_lo,
                       int log2_lambda_hi, const WolffOptions& opt) {
  WolffSweep sweep;
  std::vector<std::pair<double, double>> pairs;
  for (int e = log2_lambda_lo; e <= log2_lambda_hi; ++e) {
    double lambda = std::exp2(e);
    WolffReport row = wolff_example(c, spec, lambda, opt);
    pairs.emplace_back(std::log(lambda), std::log(row.expectation_norm));
    sweep.rows.push_back(row);
  }
  sweep.fit = exponent_fit(pairs);
  return sweep;
}

double wolff_square_function(const Curve& c, const GridSpec& spec,
                             double lambda, const WolffOptions& opt) {
  std::vector<PacketModes> packets = packet_modes(c, spec, lambda, opt);
  std::vector<double> sumsq(spec.samples(), 0.0);
  for (const PacketModes& pm : packets) {
    PeriodicField g(spec, Side::frequency);
    for (std::size_t i = 0; i < pm.flat.size(); ++i)
      g.data[pm.flat[i]] = pm.weight[i];
    fft_inverse(g);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < g.size(); ++i)
      sumsq[i] += std::norm(g.data[i]);
  }
  double acc = 0.0;
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(sumsq.size()); ++i)
    acc += modulus_power(sumsq[i], opt.p);
  return std::pow(std::pow(spec.cell(), spec.n) * acc, 1.0 / opt.p);
}

InversionCheck wolff_inversion_check(const Curve& c, const Cutoff& chi,
                                     const GridSpec& spec, double lambda,
                                     const WolffOptions& opt, double floor) {
  std::vector<PacketModes> packets = packet_modes(c, spec, lambda, opt);
  Rng rng(opt.seed, 900);
  double scale = 2.0 * kPi / spec.period;
  double kmax = 0.0;

  struct ModeEntry {
    std::int64_t flat;
    double g;
  };
  std::vector<ModeEntry> modes;
  for (const PacketModes& pm : packets) {
    double sign = rng.rademacher();
    for (std::size_t i = 0; i < pm.flat.size(); ++i)
      modes.push_back({pm.flat[i], sign * pm.weight[i]});
  }
  auto decode = [&spec, scale](std::int64_t flat, Vec& out) {
    out.resize(spec.n);
    for (int a = spec.n - 1; a >= 0; --a) {
      out[a] = scale * spec.freq_of(static_cast<int>(flat % spec.N));
      flat /= spec.N;
    }
  };
  Vec k(spec.n);
  for (const ModeEntry& m : modes) {
    decode(m.flat, k);
    kmax = std::max(kmax, k.norm());
  }
  MuHatBatch batch = mu_hat_batch_nodes(c, chi, kmax + 1.0);

  double num = 0.0, den = 0.0;
  std::int64_t covered = 0;
  for (const ModeEntry& m : modes) {
    decode(m.flat, k);
    den += m.g * m.g;
    cplx mu_fine = eval_mu_hat(c, chi, k);
    if (std::abs(mu_fine) < floor) continue;
    ++covered;
    cplx f_hat = m.g / mu_fine;
    cplx g_back = mu_hat_from_batch(batch, k) * f_hat;
    num += std::norm(g_back - cplx(m.g, 0.0));
  }
  InversionCheck out;
  out.residual = den > 0.0 ? std::sqrt(num / den) : 0.0;
  out.covered_fraction =
      modes.empty() ? 0.0 : static_cast<double>(covered) / modes.size();
  return out;
}

}  // namespace curvelab
