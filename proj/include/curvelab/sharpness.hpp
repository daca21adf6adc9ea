#pragma once
// Grid realizations of the norm-ratio lower-bound examples: the modulated
// bump family and randomized wave-packet sums along the worst-decay cone,
// plus the least-squares exponent fitter used across experiment drivers.

#include <cstdint>
#include <utility>
#include <vector>

#include "curvelab/common.hpp"
#include "curvelab/curve.hpp"
#include "curvelab/cutoffs.hpp"
#include "curvelab/grid.hpp"

namespace curvelab {

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  int points = 0;
};

// Ordinary least squares on (abscissa, ordinate) pairs, typically
// (log lambda, log value).  Requires >= 4 points with non-degenerate
// abscissae.
FitResult exponent_fit(const std::vector<std::pair<double, double>>& pairs);

struct BumpReport {
  double lambda = 0.0;
  double p = 2.0;
  double f_norm = 0.0;            // ||f||_p
  double af_norm = 0.0;           // ||A f||_p
  double ratio = 0.0;             // af_norm / f_norm
  double neighborhood_min = 0.0;  // min over curve-neighborhood samples of
                                  // lambda |A f(x)|
};

// Modulated-bump ratio at one scale.  lambda must stay below a quarter of
// the lattice Nyquist frequency; the neighborhood values are evaluated by
// an exact mode sum at off-lattice points along the curve.
BumpReport bump_example(const Curve& c, const Cutoff& chi,
                        const GridSpec& spec, double lambda, double p,
                        int neighborhood_samples = 21);

struct BumpSweep {
  std::vector<BumpReport> rows;
  FitResult norm_fit;   // log ||f||_p vs log lambda; expect -n/p
  FitResult ratio_fit;  // log ratio vs log lambda; expect -1/p'
};

BumpSweep bump_sweep(const Curve& c, const Cutoff& chi, const GridSpec& spec,
                     int log2_lambda_lo, int log2_lambda_hi, double p);

struct WolffOptions {
  double epsilon = 0.1;  // packet index window |nu| <= epsilon lambda^{1/n}
  double rho = 0.05;     // packet radius factor: support radius rho lambda^{1/n}
  double p = 6.0;
  int trials = 32;
  std::uint64_t seed = 1;
};

struct WolffReport {
  double lambda = 0.0;
  int packets = 0;
  std::int64_t modes = 0;          // lattice modes across all packets
  std::vector<double> trial_norms; // ||g^omega||_p per draw
  double expectation_norm = 0.0;   // (mean of ||g||_p^p)^{1/p}
  double expectation_stderr = 0.0; // delta-method error of the above
  double median_norm = 0.0;
};

// Randomized packet sums at one scale: packets centered on the worst-decay
// cone with disjoint lattice supports (overlap raises config_error asking
// for a smaller radius factor).
WolffReport wolff_example(const Curve& c, const GridSpec& spec, double lambda,
                          const WolffOptions& opt);

struct WolffSweep {
  std::vector<WolffReport> rows;
  FitResult fit;  // expect 1 - 1/p + 1/(2n)
};

WolffSweep wolff_sweep(const Curve& c, const GridSpec& spec, int log2_lambda_lo,
                       int log2_lambda_hi, const WolffOptions& opt);

// ||(sum_nu |g_nu|^2)^{1/2}||_p for the same ensemble; the randomized median
// must sit within a fixed factor of this square-function value.
double wolff_square_function(const Curve& c, const GridSpec& spec,
                             double lambda, const WolffOptions& opt);

// Packet-sum inversion through the averaging multiplier: on the ensemble
// modes with |mu_hat| >= floor the packet data are divided by an adaptively
// quadratured multiplier and re-multiplied by an independently quadratured
// batch-rule multiplier.  Returns the relative l2 defect over those modes
// and the fraction of modes above the floor.
struct InversionCheck {
  double residual = 0.0;
  double covered_fraction = 0.0;
};

InversionCheck wolff_inversion_check(const Curve& c, const Cutoff& chi,
                                     const GridSpec& spec, double lambda,
                                     const WolffOptions& opt,
                                     double floor = 1e-6);

}  // namespace curvelab
