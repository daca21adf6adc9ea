#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "curvelab/common.hpp"
#include "curvelab/curve.hpp"
#include "curvelab/grid.hpp"
#include "curvelab/plates.hpp"
#include "curvelab/sharpness.hpp"

namespace curvelab {

// A frequency region is a membership predicate on physical frequencies plus a
// label used in reports.
struct FrequencyRegion {
  std::string label;
  std::function<bool(const Vec&)> member;
};

// Frame-aligned boxes of width r^(d+1-j) along the j-th frame direction for
// j <= d, pinned to [lambda/2, lambda] along direction d+1 and to [-lambda,
// lambda] beyond, centered on the s-net i*r inside [s_lo, s_hi].
std::vector<FrequencyRegion> frame_box_regions(CurvePtr c, int d, double r,
                                               double lambda,
                                               double s_lo = -0.25,
                                               double s_hi = 0.25);

// Parallelepipeds g(s) + [g]_{s,r} [-2,2]^d around a generator curve whose
// dimension matches the grid, scaled by lambda; same s-net convention.
std::vector<FrequencyRegion> slab_regions(CurvePtr generator, double r,
                                          double lambda, double s_lo = -0.25,
                                          double s_hi = 0.25);

// Truncated plates of a cone tuple, scaled by lambda; same s-net convention.
std::vector<FrequencyRegion> plate_regions(const ConeTuple& tuple, const Vec& a,
                                           int K, double r, double lambda,
                                           double s_lo = -0.25,
                                           double s_hi = 0.25);

struct DecouplingTrialSpec {
  int gaussian_trials = 32;
  bool focusing = true;  // one extra trial with all-ones coefficients
  std::uint64_t seed = 1;
};

// Ratio distribution at a single scale.  Lattice modes are assigned to the
// first region whose membership test passes, so the per-region fields are
// disjoint in frequency by construction.  Regions left without any lattice
// mode are excluded and listed.  The focusing trial, when enabled, is the
// last entry of each ratio vector.
struct ScaleRatios {
  double r = 0.0;
  int regions = 0;
  int occupied = 0;
  std::vector<std::string> empty_labels;
  std::int64_t modes = 0;
  std::vector<double> lp_ratios;  // |sum f|_p / (sum |f_i|_p^p)^(1/p)
  std::vector<double> l2_ratios;  // |sum f|_p / (sum |f_i|_p^2)^(1/2)
  double lp_max = 0.0, lp_median = 0.0;
  double l2_max = 0.0, l2_median = 0.0;
  double lp_trivial_bound = 1.0;  // occupied^(1-1/p)
  double l2_trivial_bound = 1.0;  // occupied^(1/2)
};

ScaleRatios decoupling_scale_ratios(const std::vector<FrequencyRegion>& regions,
                                    double p, const GridSpec& spec,
                                    const DecouplingTrialSpec& trials);

// Ratios across a ladder of scales with power-law fits of the ratio
// statistics against log(1/r).  Needs at least 4 scales.
struct DecouplingReport {
  double p = 2.0;
  std::vector<ScaleRatios> scales;
  FitResult lp_median_fit, lp_max_fit;
  FitResult l2_median_fit, l2_max_fit;
};

DecouplingReport decoupling_constant_estimate(
    const std::vector<std::pair<double, std::vector<FrequencyRegion>>>&
        regions_by_scale,
    double p, const GridSpec& spec, const DecouplingTrialSpec& trials);

}  // namespace curvelab
