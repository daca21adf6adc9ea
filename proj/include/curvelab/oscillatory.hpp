#pragma once

#include <functional>
#include <vector>

#include "curvelab/common.hpp"
#include "curvelab/curve.hpp"
#include "curvelab/cutoffs.hpp"

namespace curvelab {

// Phase given by value and first derivative (both analytic).
struct PhaseFn {
  std::function<double(double)> value;
  std::function<double(double)> d1;
};

struct OscQuadOptions {
  double tol = 1e-10;
  double nodes_per_osc = 20.0;
  double richardson_safety = 2.0;
  int max_doublings = 12;
  int max_depth = 48;
  int panel_nodes = 16;
};

struct OscillatoryResult {
  cplx value;
  double error_estimate;
  int64_t evals;
};

// integral of amp(s) exp(i phase(s)) ds over [a, b].

// Fixed composite Gauss rule sized from a sampled oscillation count, with
// panel doubling until successive values differ by at most tol / safety.
OscillatoryResult oscillatory_reference(
    const std::function<double(double)>& amp, const PhaseFn& phase, double a,
    double b, const OscQuadOptions& opt = {});

// Adaptive bisection.  Intervals with sup|phase'| * width < 1 are treated as
// smooth and accepted on an 8-vs-16 node comparison; oscillatory intervals
// are accepted on a one-panel-vs-two-panel comparison.
OscillatoryResult oscillatory_adaptive(
    const std::function<double(double)>& amp, const PhaseFn& phase, double a,
    double b, const OscQuadOptions& opt = {});

enum class OscRoute { kReference, kAdaptive };

// mu_hat(xi) = integral exp(-i <gamma(s), xi>) chi(s) ds.
// Refuses |xi| beyond 2^18 (direct quadrature budget).
cplx eval_mu_hat(const Curve& c, const Cutoff& chi, const Vec& xi,
                 const OscQuadOptions& opt = {},
                 OscRoute route = OscRoute::kAdaptive);

// m[a](xi) = integral exp(-i <gamma(s), xi>) a(xi; s) chi(s) ds where the
// symbol is an s-profile at fixed xi.
cplx eval_multiplier(const Curve& c, const std::function<double(double)>& s_profile,
                     const Cutoff& chi, const Vec& xi,
                     const OscQuadOptions& opt = {},
                     OscRoute route = OscRoute::kAdaptive);

// model integral: integral eta(s) exp(i lambda (sum_j w_j s^j + s^n + g s^(n+1))) ds,
// w has n-1 entries (powers 1..n-1), eta supported in [-1, 1].
cplx model_integral(int n, double lambda, const Cutoff& amp, const Vec& w,
                    double g, const OscQuadOptions& opt = {},
                    OscRoute route = OscRoute::kReference);

// Leading stationary-phase constant for the model phase s^n at the origin:
//   odd n:  (2/n) Gamma(1/n) sin((n-1) pi / (2n))      (real)
//   even n: (2/n) Gamma(1/n) exp(i pi / (2n))
cplx stationary_phase_constant(int n);

// Fixed node set reusable across many frequencies of magnitude <= lambda_max:
// composite Gauss panels sized for nodes_per_osc at lambda_max.
struct MuHatBatch {
  std::vector<double> s;
  std::vector<double> chiw;        // chi(s_q) * quadrature weight
  Eigen::MatrixXd gamma_nodes;     // n x Q, column q = gamma(s_q)
};

MuHatBatch mu_hat_batch_nodes(const Curve& c, const Cutoff& chi,
                              double lambda_max, double nodes_per_osc = 24.0,
                              int panel_nodes = 16);

cplx mu_hat_from_batch(const MuHatBatch& batch, const Vec& xi);

// L1 mass of the cutoff; |mu_hat| never exceeds it.
double cutoff_mass(const Cutoff& chi);

}  // namespace curvelab
