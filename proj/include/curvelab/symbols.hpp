#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "curvelab/common.hpp"
#include "curvelab/cone.hpp"
#include "curvelab/curve.hpp"
#include "curvelab/cutoffs.hpp"
#include "curvelab/rng.hpp"

namespace curvelab {

// symbol value at (xi, s)
using SymbolFn = std::function<double(const Vec&, double)>;

// ---------------------------------------------------------------------------
// Frequency-region classification (dim 4)

struct RegionParams {
  double delta0 = 0.01;
  // thresholds per derivative order; built by defaults() when unset
  std::vector<double> delta;
  static RegionParams defaults();
};

struct RegionWeights {
  std::vector<double> chi;  // weight of region J at entry J-1
  double defect;            // product of all mollified indicators
};

// min over s in [-window, window] of |<gamma^(j)(s), xi>|
double min_pairing(const Curve& c, const Vec& xi, int order,
                   double window = 0.5);

// chi_J = (prod_{j<J} rho_j)(1 - rho_J) with rho_j a smoothed indicator of
// {min_pairing_j < delta_j |xi|}.  sum_J chi_J + defect = 1.
RegionWeights classify_region(const Curve& c, const Vec& xi,
                              const RegionParams& params = RegionParams::defaults());

// ---------------------------------------------------------------------------
// Scale ladder driven by the first-derivative pairing at the root of the
// second-derivative pairing (applies where the third derivative pairing is
// bounded below; whole space for dim 3).

struct J3Options {
  double rho = 0.05;
  double eps = 0.1;
  double sampler_spread = 0.2;  // ratio window used by the audit sampler
};

struct J3PieceValue {
  int l;
  long mu;
  double value;       // ladder x angular x base
  double s_window;    // narrowed s-cutoff factor of the (eps) variant
};

struct J3Eval {
  double base = 0.0;
  bool in_domain = false;
  double theta = 0.0, u = 0.0;
  int L = 0;
  std::vector<J3PieceValue> pieces;  // nonzero pieces
  double sum = 0.0;                  // sum of piece values
};

class J3Decomposition {
 public:
  J3Decomposition(CurvePtr curve, SymbolFn base, int k, J3Options opt = {});
  J3Eval eval(const Vec& xi, double s) const;
  int k() const { return k_; }
  const J3Options& options() const { return opt_; }
  const Curve& curve() const { return *curve_; }
  double base_value(const Vec& xi, double s) const { return base_(xi, s); }

 private:
  CurvePtr curve_;
  SymbolFn base_;
  int k_;
  J3Options opt_;
};

// ---------------------------------------------------------------------------
// Two-parameter ladder for dim 4 driven by the cone root data.

struct J4Options {
  double rho = 0.05;
  double eps = 0.1;
  double sampler_spread = 0.16;
};

struct J4PieceValue {
  int family;  // 1..4: single-ladder pieces at level l2; 5: (l1, l2) pieces
  int l1, l2;  // family < 5: l1 == l2
  long mu;     // angular index (families 1-4) or angular group (family 5)
  long nu;     // family 5: own angular index at exponent q = (3 l1 - l2)/2
  double value;
  double s_window;  // (eps)-variant factor (families with s-localization)
};

struct J4Eval {
  double base = 0.0;
  bool in_domain = false;
  ConeRoots roots;
  int m = 0;  // floor(k/4)
  std::vector<J4PieceValue> pieces;
  double sum = 0.0;
};

class J4Decomposition {
 public:
  J4Decomposition(CurvePtr curve, SymbolFn base, int k, J4Options opt = {});
  J4Eval eval(const Vec& xi, double s) const;
  int k() const { return k_; }
  const J4Options& options() const { return opt_; }
  const Curve& curve() const { return *curve_; }
  double base_value(const Vec& xi, double s) const { return base_(xi, s); }
  CurvePtr curve_ptr() const { return curve_; }

  static int l2_cap(int k) { return k / 4; }
  static int l1_cap(int k, int l2) { return (2 * k + l2) / 9; }

 private:
  CurvePtr curve_;
  SymbolFn base_;
  int k_;
  J4Options opt_;
};

// ---------------------------------------------------------------------------
// Ready-made base symbols: dyadic shell at level k, cone window keeping the
// dominant coordinate, s-cutoff chi.

SymbolFn make_cone_window_base(int n, int dominant_axis, int k,
                               double plateau_ratio, double support_ratio,
                               Cutoff chi);

// ---------------------------------------------------------------------------
// Audits

struct DecompositionAudit {
  static constexpr int kMaxGap = 8;

  double max_reconstruction_error = 0.0;
  double max_box_constant = 0.0;    // single-scale boxes
  // Refined-window (two-scale) box constants.  The third-pairing slot of the
  // refined box is pinned from below only for branch-resolved samples: the
  // window gap l1 - l2 must reach pinning_gap(rho) and the window center must
  // sit closer to its own first-derivative branch than to the opposite one.
  // Branch-straddling samples are tallied separately; on them the lower
  // pinning genuinely degenerates and no finite calibration exists.
  double max_box_constant_b = 0.0;           // branch-resolved samples
  double max_box_constant_b_rescaled = 0.0;  // branch-resolved samples
  double max_box_constant_b_straddling = 0.0;
  int64_t b_pieces_resolved = 0;
  int64_t b_pieces_straddling = 0;
  // The unrestricted constants stratified by the window gap l1 - l2.
  std::array<double, kMaxGap> box_constant_b_by_gap{};
  std::array<double, kMaxGap> box_constant_b_rescaled_by_gap{};
  std::array<int64_t, kMaxGap> b_pieces_by_gap{};
  int points = 0;
  int64_t pieces = 0;
  std::array<int64_t, 6> family_pieces{};  // coverage per family (1-based)
  int max_angular_terms = 0;  // nonzero angular indices sharing one level
  // collected on family-5 supports, for the localization property checks
  double b_third_ratio_min = 1e300;  // |<gamma''', xi>| / (rho^{1/2} 2^{k-l2})
  double b_third_ratio_max = 0.0;
  double b_u1gap_min = 1e300;  // |u1p - u1m| / (rho^{3/2} 2^{k-3 l2})
};

// Smallest window gap l1 - l2 at which the refined angular window
// 2^{-3(l1-l2)/2} is at least as fine as the branch separation sqrt(rho),
// making the third-pairing pinning of the refined box effective.
int pinning_gap(double rho);

DecompositionAudit j3_audit(const J3Decomposition& dec, int points,
                            std::uint64_t seed);
DecompositionAudit j4_audit(const J4Decomposition& dec, int points,
                            std::uint64_t seed);

// Draw xi near the dyadic shell 2^k inside the ratio window, and s inside
// [-s_range, s_range]; used by the audits and the derivative-bound driver.
Vec sample_shell_xi(int n, int dominant_axis, int k, double ratio_window,
                    Rng& rng);

}  // namespace curvelab
