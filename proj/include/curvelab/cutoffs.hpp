#pragma once

#include <utility>
#include <vector>

#include "curvelab/common.hpp"

namespace curvelab {

// Normalized bump: phi(t) = c exp(-1/(1-t^2)) on (-1,1), zero outside,
// with integral 1.  Derivatives are analytic via the recursion
// phi^(N) = phi * P_N(t) / (1-t^2)^(2N).
double bump(double t);
double bump_derivative(double t, int order);  // order in [0, 8]

// Smooth step: Phi(x) = integral of phi from -1 to x.  Identically 0 for
// x <= -1, identically 1 for x >= 1, and Phi(x) + Phi(-x) = 1 bitwise.
// Values come from a dense cumulative table with quintic Hermite cells;
// derivatives are analytic (Phi^(N) = phi^(N-1)).
double smooth_step(double x);
double smooth_step_derivative(double x, int order);  // order in [0, 9]

// Even cutoff equal to 1 on [-plateau, plateau], supported on
// [-support, support]:  M(x) = Phi((x+m)/h) - Phi((x-m)/h),
// m = (plateau+support)/2, h = (support-plateau)/2.
class Cutoff {
 public:
  Cutoff(double plateau, double support);
  double operator()(double x) const;
  double derivative(double x, int order) const;
  double plateau() const { return plateau_; }
  double support() const { return support_; }

 private:
  double plateau_, support_, m_, h_;
};

// eta = Cutoff(1, 2): 1 on [-1,1], supported on [-2,2].
const Cutoff& eta();

// Unit-width partition bump: zeta(y) = Phi(2y+1) - Phi(2y-1); zeta(0) = 1,
// support [-1,1], and sum_mu zeta(x - mu) = 1.
double zeta(double y);

// All nonzero terms of the partition at y: pairs (mu, zeta(y - mu)).
// Terms are computed from shared smooth-step arguments so the returned
// weights sum to exactly 1.0.
std::vector<std::pair<long, double>> zeta_weights(double y);

// Dyadic annulus weights at radius r: entry k of the result is
//   k = 0:      eta(r)
//   k >= 1:     eta(2^-k r) - eta(2^-(k-1) r)
// computed from shared eta evaluations, so partial sums telescope exactly:
// sum_{k<=K} = eta(2^-K r).
std::vector<double> dyadic_band_weights(double r, int K);

// Single annulus weight, same convention as above.
double dyadic_band(double r, int k);

}  // namespace curvelab
