#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "curvelab/common.hpp"
#include "curvelab/curve.hpp"

namespace curvelab {

// Practical admissible cone: xi_n > 0 and |xi_j| <= spread * xi_n for j < n.
bool admissible(const Vec& xi, double spread = 0.3);

// Unique root s in [-1,1] of <gamma^(n-1)(s), xi>, assuming
// <gamma^(n)(s), xi> > 0 there: bisection bracket, Newton polish,
// residual <= 1e-12 |xi|.
double theta_root(const Curve& c, const Vec& xi);

// Root of <gamma^(order)(s), xi> on [-1,1] given a sign change between the
// endpoints; same bracket-then-polish scheme and residual contract.
double pairing_root(const Curve& c, const Vec& xi, int order);

// Root data for dim-4 curves.
struct ConeRoots {
  double theta2 = 0.0;       // root of <gamma^(3), xi>
  double u12 = 0.0;          // <gamma'(theta2), xi>
  double u2 = 0.0;           // <gamma''(theta2), xi>
  bool degenerate = false;   // |u2| <= 1e-12 |xi|: double root at theta2
  bool has_theta1 = false;   // true iff u2 < 0 (outside the degenerate band)
  double theta1_minus = 0.0, theta1_plus = 0.0;  // roots of <gamma'', xi>
  double u1_minus = 0.0, u1_plus = 0.0;          // <gamma'(theta1^pm), xi>
  double u31_minus = 0.0, u31_plus = 0.0;        // <gamma^(3)(theta1^pm), xi>
  double u1 = 0.0, theta1 = 0.0;  // branch of smaller |u1|
  int branch = +1;                // +1 or -1
  bool tie = false;               // |u1^-| == |u1^+|: + branch chosen
  double residual_theta2 = 0.0;   // |<gamma^(3)(theta2), xi>|
  double residual_theta1 = 0.0;   // max over the two theta1 roots
};

ConeRoots cone_roots(const Curve& c, const Vec& xi);

// Moment-curve worst-decay direction: component i = (-tau)^(n-i) / (n-i)!.
Vec moment_worst_cone(int n, double tau);

struct WorstConePoint {
  double tau;
  Vec xi;      // xi_{n-1} = -tau, xi_n = 1
  double s;    // annihilating parameter: <gamma^(j)(s), xi> = 0, j < n
  bool continuation_used;
  int iterations;
};

// Newton on (s, xi_1..xi_{n-2}) with the moment closed form as the initial
// guess; falls back to stepwise continuation from tau = 0.
WorstConePoint worst_cone(const Curve& c, double tau, double tau_max = 0.3);

// phi(xi) = <gamma(theta(xi)), xi> at the theta_root.
double phi_value(const Curve& c, const Vec& xi);

// Analytic gradient:
//   d_xi phi = gamma(theta) - <gamma'(theta), xi> gamma^(n-1)(theta) / <gamma^(n)(theta), xi>.
Vec phi_gradient(const Curve& c, const Vec& xi);

struct PacketCenter {
  long nu;
  Vec xi_nu;   // lambda * Gamma(nu lambda^(-1/n))
  double phi;
  Vec x_nu;    // -grad phi at xi_nu
};

PacketCenter packet_center(const Curve& c, double lambda, long nu);

struct SeparationReport {
  double score;              // min_{nu != nu'} |x^nu - x^nu'| lambda^(1/n) / |nu - nu'|
  double effective_epsilon;  // packet range actually used, as a multiple of lambda^(1/n)
  bool widened;              // range was raised to the minimum of 2 packets per side
  int packet_count;
};

// Packet range |nu| <= max(epsilon lambda^(1/n), 2).
SeparationReport separation_audit(const Curve& c, double lambda,
                                  double epsilon);

struct DerivativeAudit {
  double max_ratio;   // worst normalized FD-vs-prediction ratio
  int skipped;
  int evaluated;
};

// Finite-difference directional derivatives of theta2, u2, u12 along the
// frame directions e_j(s_mu), orders 1 and 2, normalized by the dyadic
// scaling predictions at (k, l).  Samples carry (xi, s_mu).
DerivativeAudit derivative_bound_audit(
    const Curve& c, int k, int l,
    const std::vector<std::pair<Vec, double>>& samples);

}  // namespace curvelab
