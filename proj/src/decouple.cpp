#include "curvelab/decouple.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "curvelab/frenet.hpp"
#include "curvelab/rng.hpp"

namespace curvelab {

namespace {

std::vector<double> net_centers(double r, double s_lo, double s_hi) {
  if (!(r > 0.0 && r <= 1.0)) throw config_error("scale r must lie in (0, 1]");
  if (!(s_lo < s_hi)) throw config_error("empty parameter interval");
  std::vector<double> centers;
  long i_lo = static_cast<long>(std::ceil(s_lo / r - 1e-12));
  long i_hi = static_cast<long>(std::floor(s_hi / r + 1e-12));
  for (long i = i_lo; i <= i_hi; ++i) centers.push_back(i * r);
  return centers;
}

std::string scale_label(const char* kind, double s, double r) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s s=%.6g r=%.6g", kind, s, r);
  return buf;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// |z|^p from the squared modulus; multiply chain for small even p.
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

}  // namespace

std::vector<FrequencyRegion> frame_box_regions(CurvePtr c, int d, double r,
                                               double lambda, double s_lo,
                                               double s_hi) {
  int n = c->dim();
  if (d < 2 || d > n - 1) throw config_error("box order d must lie in [2, n-1]");
  if (!(lambda > 0.0)) throw config_error("lambda must be positive");
  std::vector<FrequencyRegion> regions;
  for (double s : net_centers(r, s_lo, s_hi)) {
    // Frame rows cached per region; membership is n dot products.
    auto frame = std::make_shared<Mat>(frenet_frame(*c, s).E);
    Vec caps(n);
    for (int j = 1; j <= n; ++j)
      caps[j - 1] = j <= d ? lambda * std::pow(r, d + 1 - j) : lambda;
    FrequencyRegion region;
    region.label = scale_label("frame-box", s, r);
    region.member = [frame, caps, d, lambda](const Vec& xi) {
      int n = static_cast<int>(caps.size());
      for (int j = 0; j < n; ++j) {
        double comp = std::abs(frame->col(j).dot(xi));
        if (comp > caps[j]) return false;
        if (j == d && comp < 0.5 * lambda) return false;
      }
      return true;
    };
    regions.push_back(std::move(region));
  }
  return regions;
}

std::vector<FrequencyRegion> slab_regions(CurvePtr generator, double r,
                                          double lambda, double s_lo,
                                          double s_hi) {
  if (!(lambda > 0.0)) throw config_error("lambda must be positive");
  std::vector<FrequencyRegion> regions;
  for (double s : net_centers(r, s_lo, s_hi)) {
    auto slab = std::make_shared<Slab>(make_slab(*generator, s, r));
    FrequencyRegion region;
    region.label = scale_label("slab", s, r);
    region.member = [slab, lambda](const Vec& xi) {
      return slab->contains(xi / lambda);
    };
    regions.push_back(std::move(region));
  }
  return regions;
}

std::vector<FrequencyRegion> plate_regions(const ConeTuple& tuple, const Vec& a,
                                           int K, double r, double lambda,
                                           double s_lo, double s_hi) {
  if (!(lambda > 0.0)) throw config_error("lambda must be positive");
  std::vector<FrequencyRegion> regions;
  for (const Plate& plate : plate_decomposition(tuple, a, K, r, s_lo, s_hi)) {
    auto held = std::make_shared<Plate>(plate);
    FrequencyRegion region;
    region.label = scale_label("plate", plate.s, r);
    region.member = [held, lambda](const Vec& xi) {
      return held->contains(xi / lambda);
    };
    regions.push_back(std::move(region));
  }
  return regions;
}

ScaleRatios decoupling_scale_ratios(const std::vector<FrequencyRegion>& regions,
                                    double p, const GridSpec& spec,
                                    const DecouplingTrialSpec& trials) {
  if (regions.empty()) throw config_error("region list is empty");
  if (!(p >= 2.0)) throw config_error("exponent p must satisfy p >= 2");
  if (trials.gaussian_trials < 1)
    throw config_error("gaussian trial count must be >= 1");
  check_grid_budget(spec);
  std::int64_t field_bytes = 16 * spec.samples();
  std::int64_t need = 2 * field_bytes;
  if (need > budget_limit_bytes()) {
    throw budget_error("decoupling trial needs " + std::to_string(need) +
                       " bytes for two fields on a grid of " +
                       std::to_string(spec.N) + "^" + std::to_string(spec.n) +
                       " samples; reduce the grid or raise the budget");
  }

  // Assign each lattice mode to the first region containing it.
  std::int64_t total = spec.samples();
  std::vector<int> owner(total, -1);
  int nregions = static_cast<int>(regions.size());
#pragma omp parallel
  {
    Vec xi(spec.n);
#pragma omp for schedule(static)
    for (std::int64_t flat = 0; flat < total; ++flat) {
      double scale = 2.0 * kPi / spec.period;
      std::int64_t rest = flat;
      for (int a = spec.n - 1; a >= 0; --a) {
        xi[a] = scale * spec.freq_of(static_cast<int>(rest % spec.N));
        rest /= spec.N;
      }
      for (int i = 0; i < nregions; ++i)
        if (regions[i].member(xi)) {
          owner[flat] = i;
          break;
        }
    }
  }

  std::vector<std::vector<std::int64_t>> modes(nregions);
  for (std::int64_t flat = 0; flat < total; ++flat)
    if (owner[flat] >= 0) modes[owner[flat]].push_back(flat);

  ScaleRatios out;
  out.regions = nregions;
  std::vector<int> occupied_idx;
  for (int i = 0; i < nregions; ++i) {
    if (modes[i].empty())
      out.empty_labels.push_back(regions[i].label);
    else {
      occupied_idx.push_back(i);
      out.modes += static_cast<std::int64_t>(modes[i].size());
    }
  }
  out.occupied = static_cast<int>(occupied_idx.size());
  if (out.occupied == 0)
    throw config_error(
        "no region contains a lattice mode; enlarge lambda or the grid");
  out.lp_trivial_bound = std::pow(out.occupied, 1.0 - 1.0 / p);
  out.l2_trivial_bound = std::sqrt(static_cast<double>(out.occupied));

  int rows = trials.gaussian_trials + (trials.focusing ? 1 : 0);
  out.lp_ratios.assign(rows, 0.0);
  out.l2_ratios.assign(rows, 0.0);

  int max_threads = omp_get_max_threads();
  int workers = static_cast<int>(std::clamp<std::int64_t>(
      budget_limit_bytes() / (2 * field_bytes), 1, max_threads));
  double cell_vol = std::pow(spec.cell(), spec.n);

#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (int t = 0; t < rows; ++t) {
    bool focusing = trials.focusing && t == rows - 1;
    Rng rng(trials.seed, 500 + t);
    // Coefficients drawn region by region in listed order.
    std::vector<std::vector<cplx>> coeff(out.occupied);
    for (int oi = 0; oi < out.occupied; ++oi) {
      const auto& list = modes[occupied_idx[oi]];
      coeff[oi].resize(list.size());
      for (std::size_t m = 0; m < list.size(); ++m)
        coeff[oi][m] =
            focusing ? cplx(1.0, 0.0) : cplx(rng.gauss(), rng.gauss());
    }

    PeriodicField work(spec, Side::frequency);
    double sum_pp = 0.0, sum_p2 = 0.0;
    for (int oi = 0; oi < out.occupied; ++oi) {
      const auto& list = modes[occupied_idx[oi]];
      std::fill(work.data.begin(), work.data.end(), cplx(0.0, 0.0));
      for (std::size_t m = 0; m < list.size(); ++m)
        work.data[list[m]] = coeff[oi][m];
      work.side = Side::frequency;
      fft_inverse(work);
      double acc = 0.0;
      for (std::int64_t i = 0; i < work.size(); ++i)
        acc += modulus_power(std::norm(work.data[i]), p);
      double norm_i = std::pow(cell_vol * acc, 1.0 / p);
      sum_pp += std::pow(norm_i, p);
      sum_p2 += norm_i * norm_i;
    }

    std::fill(work.data.begin(), work.data.end(), cplx(0.0, 0.0));
    for (int oi = 0; oi < out.occupied; ++oi) {
      const auto& list = modes[occupied_idx[oi]];
      for (std::size_t m = 0; m < list.size(); ++m)
        work.data[list[m]] = coeff[oi][m];
    }
    work.side = Side::frequency;
    fft_inverse(work);
    double acc = 0.0;
    for (std::int64_t i = 0; i < work.size(); ++i)
      acc += modulus_power(std::norm(work.data[i]), p);
    double norm_sum = std::pow(cell_vol * acc, 1.0 / p);

    out.lp_ratios[t] = norm_sum / std::pow(sum_pp, 1.0 / p);
    out.l2_ratios[t] = norm_sum / std::sqrt(sum_p2);
  }

  out.lp_max = *std::max_element(out.lp_ratios.begin(), out.lp_ratios.end());
  out.l2_max = *std::max_element(out.l2_ratios.begin(), out.l2_ratios.end());
  out.lp_median = median_of(out.lp_ratios);
  out.l2_median = median_of(out.l2_ratios);
  return out;
}

DecouplingReport decoupling_constant_estimate(
    const std::vector<std::pair<double, std::vector<FrequencyRegion>>>&
        regions_by_scale,
    double p, const GridSpec& spec, const DecouplingTrialSpec& trials) {
  DecouplingReport report;
  report.p = p;
  std::vector<std::pair<double, double>> lp_med, lp_max, l2_med, l2_max;
  for (const auto& [r, regions] : regions_by_scale) {
    ScaleRatios row = decoupling_scale_ratios(regions, p, spec, trials);
    row.r = r;
    double x = std::log(1.0 / r);
    lp_med.emplace_back(x, std::log(row.lp_median));
    lp_max.emplace_back(x, std::log(row.lp_max));
    l2_med.emplace_back(x, std::log(row.l2_median));
    l2_max.emplace_back(x, std::log(row.l2_max));
    report.scales.push_back(std::move(row));
  }
  report.lp_median_fit = exponent_fit(lp_med);
  report.lp_max_fit = exponent_fit(lp_max);
  report.l2_median_fit = exponent_fit(l2_med);
  report.l2_max_fit = exponent_fit(l2_max);
  return report;
}

}  // namespace curvelab
