#pragma once
// Cone-generating curve tuples extracted from the Frenet frame, slab and
// plate regions, the exact Lorentz-type rescaling identities, and the
// projection of truncated plates into generator slabs.

#include <cstdint>
#include <vector>

#include "curvelab/common.hpp"
#include "curvelab/curve.hpp"

namespace curvelab {

struct TupleGrid {
  double lo = -0.45;
  double hi = 0.45;
  double step = 0.02;
  int stencil = 12;  // nodes per finite-difference stencil
};

// Tuple (g_{d+1}, ..., g_n) of curves into R^d generating the cone spanned by
// the last n-d Frenet vectors of `curve`.  Writing E(s) for the frame and A(s)
// for the inverse of its lower-right (n-d) x (n-d) block, the columns of
// E_{.,>d}(s) A(s) are (g_j(s), 0) + unit_j, so the bottom block is exactly
// the identity and the g_j are read off the top block.  Values are tabulated
// on a dense s-grid; s-derivatives use centered finite-difference stencils,
// whose order is set by the grid spec.
class ConeTuple {
 public:
  ConeTuple(CurvePtr curve, int d, TupleGrid grid = {});

  int n() const { return n_; }
  int d() const { return d_; }
  const TupleGrid& grid() const { return grid_; }

  // g(s): d x (n-d) matrix with columns g_j(s), j = d+1..n.
  Mat g(double s) const;
  // Component-wise s-derivative of g, order >= 1.
  Mat g_derivative(double s, int order) const;

  // Weighted combination g_a = sum_j a_j g_j and its s-derivatives; the
  // weight vector is indexed a = (a_{d+1}, ..., a_n).
  Vec g_a(const Vec& a, double s) const;
  Vec g_a_derivative(const Vec& a, double s, int order) const;

  // [g_a]_{s,r}: d x d matrix with columns g_a^{(j)}(s) r^j, j = 1..d.
  Mat slab_matrix(const Vec& a, double s, double r) const;

  // Requires 1/4 <= a_{d+1} <= 2 and |a_j| <= 2 for j >= d+2.
  void validate_weights(const Vec& a) const;

  // min over grid nodes in [lo, hi] of |det [g_a]_{s, 1}|.
  double min_generator_determinant(const Vec& a, double lo, double hi) const;

 private:
  Mat tabulated(double s, int order) const;

  CurvePtr curve_;
  int n_ = 0;
  int d_ = 0;
  TupleGrid grid_;
  std::vector<double> nodes_;
  std::vector<Mat> values_;  // g at each node, d x (n-d)
};

// Parallelepiped g(s) + [g]_{s,r}([-2,2]^d) around a d-dimensional generator
// curve.  `box_slack_needed` returns the smallest uniform inflation of the
// coefficient box containing xi; `scale_slack_needed` the smallest C such
// that xi lies in the slab at radius C r (the inflation acting per-column as
// C^j, which is the containment used for plate projections).
struct Slab {
  int d = 0;
  double s = 0.0;
  double r = 0.0;
  Vec center;
  Mat matrix;

  double box_slack_needed(const Vec& xi) const;
  double scale_slack_needed(const Vec& xi) const;
  bool contains(const Vec& xi, double slack = 1.0) const;
};

Slab make_slab(const ConeTuple& tuple, const Vec& a, double s, double r);
Slab make_slab(const Curve& generator, double s, double r);

// Truncated plate [g]_{a,s,r}([-2,2]^n) intersected with the cube
// |xi_j - a_j| <= 1/K for j > d.  The block matrix keeps the generator slab
// in the top-left, the tuple values in the top-right, and an exact identity
// in the bottom-right, so the last n-d coordinates of the coefficient vector
// coincide with the last n-d coordinates of xi.
struct Plate {
  int n = 0;
  int d = 0;
  double s = 0.0;
  double r = 0.0;
  double K = 1.0;
  Vec a;
  Mat matrix;

  double box_slack_needed(const Vec& xi) const;
  bool cube_contains(const Vec& xi) const;
  bool contains(const Vec& xi, double slack = 1.0) const;
};

Plate make_plate(const ConeTuple& tuple, const Vec& a, double K, double s,
                 double r);

// Plates at centers i*r, i integer, lying inside [lo, hi].
std::vector<Plate> plate_decomposition(const ConeTuple& tuple, const Vec& a,
                                       double K, double r, double lo,
                                       double hi);

struct LorentzResiduals {
  double matrix_identity = 0.0;  // generator-slab factorization
  double curve_identity = 0.0;   // tuple translation-and-scale relation
};

// Verifies that rescaling the tuple about (b, rho) and forming the unit-scale
// objects of the rescaled tuple reproduces the parent objects at (s, r):
// the generator matrix identity and the tuple value identity.  The rescaled
// tuple derivatives are computed from parent derivatives at the mapped point
// through the inverse generator factor, so the residual reflects arithmetic
// roundoff only.
LorentzResiduals lorentz_identity_check(const ConeTuple& tuple, const Vec& a,
                                        double b, double rho, double s,
                                        double r);

struct PlateProjectionAudit {
  double max_constant = 0.0;  // smallest slab inflation covering all samples
  int plates = 0;
  int samples = 0;
};

// Samples members of every plate in a K^{-1/d}-plate decomposition and
// reports the smallest C such that each member projects into the generator
// slab at radius C K^{-1/d}.
PlateProjectionAudit plate_projection_audit(const ConeTuple& tuple,
                                            const Vec& a, double K,
                                            int samples_per_plate,
                                            std::uint64_t seed, double lo,
                                            double hi);

}  // namespace curvelab
