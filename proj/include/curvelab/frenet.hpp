#pragma once

#include <cstdint>

#include "curvelab/common.hpp"
#include "curvelab/curve.hpp"

namespace curvelab {

// Orthonormal frame from gamma', ..., gamma^(n) at s:  E columns e_1..e_n,
// R upper triangular with positive diagonal, [gamma]_s = E R.
// Modified Gram-Schmidt with one reorthogonalization pass; orthonormality
// enforced to 1e-12 in the max norm, condition of [gamma]_s capped at 1e8.
struct FrenetFrame {
  Mat E;
  Mat R;
};

FrenetFrame frenet_frame(const Curve& c, double s);

// max over sampled pairs and all (i,j) of
//   |<e_i(s1), e_j(s2)>| / |s1-s2|^|i-j|
// taken over `pairs` uniform draws with 0 < |s1-s2| <= max_sep.
double frenet_decay_constant(const Curve& c, int pairs, double max_sep,
                             uint64_t seed);

// Smallest C such that xi (already divided by the box scale) satisfies
//   |<e_j(s), xi>| <= C r^(d+1-j)        for j <= d
//   |<e_{d+1}(s), xi>| in [1/(2C), C]
//   |<e_j(s), xi>|  <= C                 for j >= d+2
double box_constant_needed(const Curve& c, double s, double r, int d,
                           const Vec& xi_normalized);

// Variant with separate radii: j <= d uses r1^(d+1-j); slot d+1 is pinned
// two-sidedly; slots j >= d+2 use bound C * r2^(j-d-1).
double box_constant_needed_two_scale(const Curve& c, double s, double r1,
                                     double r2, int d,
                                     const Vec& xi_normalized);

}  // namespace curvelab
