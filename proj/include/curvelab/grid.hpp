#pragma once
// Periodic-grid fields, Fourier transforms, averaging operators along a
// curve, L^p / Sobolev norms, and dyadic-band operator probes.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "curvelab/common.hpp"
#include "curvelab/curve.hpp"
#include "curvelab/cutoffs.hpp"

namespace curvelab {

inline constexpr const char* kBudgetEnv = "CURVELAB_BUDGET_BYTES";
inline constexpr std::int64_t kDefaultBudgetBytes = std::int64_t{2} << 30;

struct GridSpec {
  int n = 2;         // dimension, 2..4
  int N = 64;        // per-axis samples, power of two
  double period = 2.0 * kPi;

  std::int64_t samples() const;
  double cell() const { return period / N; }
  // Signed frequency of a storage index along one axis.
  int freq_of(int idx) const { return idx <= N / 2 ? idx : idx - N; }
};

// Nominal footprint used by the admission gate: one 8-byte word per sample.
std::int64_t grid_budget_bytes(const GridSpec& spec);
std::int64_t budget_limit_bytes();
// Throws budget_error (with the byte estimate) when the grid exceeds the
// byte budget or the 4D per-axis cap of 64.
void check_grid_budget(const GridSpec& spec);

enum class Side { physical, frequency };

class PeriodicField {
 public:
  PeriodicField(GridSpec spec, Side side);

  GridSpec spec;
  Side side;
  std::vector<cplx> data;

  std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }
  // Storage is row-major with the last axis fastest.
  std::int64_t flat(const std::array<int, 4>& idx) const;
  // Signed frequency vector of a flat index (frequency side).
  void freq_at(std::int64_t flat_idx, Vec& out) const;
};

// Forward transform carries the cell-volume weight so frequency samples
// approximate integrals against e^{-i<k,x>}; the inverse divides by the
// period volume.  A forward+inverse round trip is the identity to 1e-12.
void fft_forward(PeriodicField& f);
void fft_inverse(PeriodicField& f);

PeriodicField to_frequency(const PeriodicField& f);
PeriodicField to_physical(const PeriodicField& f);

// m evaluated on the signed-frequency lattice; field must be physical-side.
PeriodicField apply_multiplier(const PeriodicField& f,
                               const std::function<cplx(const Vec&)>& m);
// Same, with a precomputed table indexed by flat frequency index.
PeriodicField apply_multiplier_table(const PeriodicField& f,
                                     const std::vector<cplx>& table);

// Riemann-sum L^p norm with cell-volume weight; p = infinity gives the max.
double lp_norm(const PeriodicField& f, double p);
// lp_norm of (1 + |k|^2)^{alpha/2} f.
double sobolev_norm(const PeriodicField& f, double p, double alpha);
// Parseval route: l2 computed from frequency samples.
double l2_norm_frequency(const PeriodicField& f);

// Averaged-curve multiplier on the frequency lattice: entry at flat index k
// is integral exp(-i<gamma(s), k>) chi(s) ds, computed from one shared
// composite quadrature rule with per-axis phase tables.  Entries with any
// |k_i| > box_limit are zero (box_limit < 0 evaluates the full lattice).
std::vector<cplx> mu_hat_lattice(const Curve& c, const Cutoff& chi,
                                 const GridSpec& spec, int box_limit,
                                 double nodes_per_osc = 24.0);

enum class AveragingBackend { multiplier, direct };

struct AveragingOptions {
  AveragingBackend backend = AveragingBackend::multiplier;
  int box_limit = -1;    // multiplier backend: frequency box restriction
  int upsample = 4;      // direct backend: spectral refinement factor
  int panel_nodes = 16;  // direct backend: quadrature panel size
  int panels = 24;       // direct backend: panels over the cutoff support
};

// A f(x) = integral f(x - gamma(s)) chi(s) ds.  The multiplier backend
// multiplies by mu_hat per lattice frequency; the direct backend quadratures
// over s with periodic multilinear interpolation of f on a zero-padded
// spectrally refined lattice.  The curve image must stay within a quarter
// period of the origin.
PeriodicField averaging_operator(const Curve& c, const Cutoff& chi,
                                 const PeriodicField& f,
                                 const AveragingOptions& opt = {});

// Smooth field concentrated at frequency radius lambda: a dyadic shell at
// scale lambda times the transform of a narrow spatial bump, normalized so
// the physical-side amplitude is O(1) near the origin.  Requires lambda at
// most a quarter of the Nyquist frequency.
PeriodicField bump_field(const GridSpec& spec, double lambda);

struct ProbeRatios {
  int k = 0;
  double p = 2.0;
  double gaussian_max = 0.0;   // max over random band-limited draws
  double bump = 0.0;           // modulated-bump probe at lambda = 2^k
  double focusing = 0.0;       // phase-conjugate probe along the worst cone
  double best = 0.0;           // max of the families
};

struct OperatorProbeReport {
  std::vector<ProbeRatios> rows;
  double slope = 0.0;
  double slope_stderr = 0.0;
  double p = 2.0;
};

struct ProbeOptions {
  double p = 4.0;
  int gaussian_trials = 6;
  std::uint64_t seed = 1;
  double nodes_per_osc = 24.0;
};

// Ratio ||band_k(D) A f||_p / ||f||_p over the probe families for one dyadic
// band.  2^{k+1} must stay below the lattice Nyquist frequency.
ProbeRatios dyadic_probe_band(const Curve& c, const Cutoff& chi,
                              const GridSpec& spec, int k,
                              const ProbeOptions& opt);

// Probes every band in [k_lo, k_hi] and fits log2(best ratio) against k.
OperatorProbeReport dyadic_operator_probe(const Curve& c, const Cutoff& chi,
                                          const GridSpec& spec, int k_lo,
                                          int k_hi, const ProbeOptions& opt);

}  // namespace curvelab
