#include "curvelab/cutoffs.hpp"

#include <cmath>

#include "curvelab/quadrature.hpp"

namespace curvelab {
namespace {

constexpr int kMaxBumpOrder = 8;
constexpr int kCells = 2048;  // cells on [-1, 0]; upper half by reflection

double raw_bump(double t) {
  double d = 1.0 - t * t;
  if (d <= 0.0) return 0.0;
  return std::exp(-1.0 / d);
}

using Poly = std::vector<double>;

Poly poly_derivative(const Poly& p) {
  if (p.size() <= 1) return {0.0};
  Poly d(p.size() - 1);
  for (size_t i = 1; i < p.size(); ++i) d[i - 1] = i * p[i];
  return d;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly r(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

Poly poly_add(const Poly& a, const Poly& b) {
  Poly r(std::max(a.size(), b.size()), 0.0);
  for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (size_t i = 0; i < b.size(); ++i) r[i] += b[i];
  return r;
}

double poly_eval(const Poly& p, double t) {
  double acc = 0.0;
  for (size_t i = p.size(); i-- > 0;) acc = acc * t + p[i];
  return acc;
}

// phi^(N) = phi * P_N / (1-t^2)^(2N);  P_1 = -2t,
// P_{N+1} = (1-t^2)^2 P_N' + 2t P_N (2N(1-t^2) - 1).
const std::vector<Poly>& bump_deriv_polys() {
  static const std::vector<Poly> polys = [] {
    std::vector<Poly> ps;
    ps.push_back({0.0, -2.0});
    const Poly q = {1.0, 0.0, -2.0, 0.0, 1.0};
    for (int n = 1; n < kMaxBumpOrder; ++n) {
      const Poly& p = ps.back();
      Poly t1 = poly_mul(q, poly_derivative(p));
      Poly mod = {2.0 * n - 1.0, 0.0, -2.0 * n};
      Poly t2 = poly_mul({0.0, 2.0}, poly_mul(p, mod));
      ps.push_back(poly_add(t1, t2));
    }
    return ps;
  }();
  return polys;
}

struct StepTable {
  double norm;                  // 1 / integral of raw bump over [-1,1]
  std::vector<double> value;    // Phi at knots of [-1, 0]
  std::vector<double> phi;      // normalized bump at knots
  std::vector<double> dphi;     // normalized bump' at knots
};

const StepTable& step_table() {
  static const StepTable table = [] {
    StepTable t;
    const QuadRule& rule = gauss_legendre(16);
    std::vector<double> cum(kCells + 1, 0.0);
    const double h = 1.0 / kCells;
    for (int i = 0; i < kCells; ++i) {
      double a = -1.0 + i * h, b = a + h;
      cum[i + 1] = cum[i] + integrate(raw_bump, a, b, rule);
    }
    t.norm = 1.0 / (2.0 * cum[kCells]);
    t.value.resize(kCells + 1);
    t.phi.resize(kCells + 1);
    t.dphi.resize(kCells + 1);
    for (int i = 0; i <= kCells; ++i) {
      t.value[i] = t.norm * cum[i];
      double x = -1.0 + i * h;
      t.phi[i] = t.norm * raw_bump(x);
      double d = 1.0 - x * x;
      t.dphi[i] = (d <= 0.0) ? 0.0
                             : t.phi[i] * poly_eval(bump_deriv_polys()[0], x) /
                                   (d * d);
    }
    t.value[kCells] = 0.5;
    return t;
  }();
  return table;
}

// Quintic Hermite on a table cell of [-1, 0]; x must lie in [-1, 0].
double step_lower(double x) {
  const StepTable& tab = step_table();
  const double h = 1.0 / kCells;
  double u = (x + 1.0) * kCells;
  int i = static_cast<int>(u);
  if (i < 0) i = 0;
  if (i >= kCells) return tab.value[kCells];
  double s = u - i;
  double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
  double h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
  double h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
  double h2 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
  double h3 = 0.5 * (s3 - 2.0 * s4 + s5);
  double h4 = -(4.0 * s3 - 7.0 * s4 + 3.0 * s5);
  double h5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
  return tab.value[i] * h0 + h * tab.phi[i] * h1 + h * h * tab.dphi[i] * h2 +
         h * h * tab.dphi[i + 1] * h3 + h * tab.phi[i + 1] * h4 +
         tab.value[i + 1] * h5;
}

}  // namespace

double bump(double t) { return step_table().norm * raw_bump(t); }

double bump_derivative(double t, int order) {
  if (order < 0 || order > kMaxBumpOrder)
    throw domain_error("bump derivative order out of range");
  if (order == 0) return bump(t);
  double d = 1.0 - t * t;
  if (d <= 0.0) return 0.0;
  double b = bump(t);
  if (b == 0.0) return 0.0;
  double denom = std::pow(d, 2 * order);
  return b * poly_eval(bump_deriv_polys()[order - 1], t) / denom;
}

double smooth_step(double x) {
  if (x <= -1.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (x > 0.0) return 1.0 - step_lower(-x);
  return step_lower(x);
}

double smooth_step_derivative(double x, int order) {
  if (order == 0) return smooth_step(x);
  return bump_derivative(x, order - 1);
}

Cutoff::Cutoff(double plateau, double support)
    : plateau_(plateau), support_(support) {
  if (!(0.0 < plateau && plateau < support))
    throw domain_error("cutoff needs 0 < plateau < support");
  m_ = 0.5 * (plateau + support);
  h_ = 0.5 * (support - plateau);
}

double Cutoff::operator()(double x) const {
  return smooth_step((x + m_) / h_) - smooth_step((x - m_) / h_);
}

double Cutoff::derivative(double x, int order) const {
  if (order == 0) return (*this)(x);
  double scale = std::pow(h_, -order);
  return scale * (smooth_step_derivative((x + m_) / h_, order) -
                  smooth_step_derivative((x - m_) / h_, order));
}

const Cutoff& eta() {
  static const Cutoff e(1.0, 2.0);
  return e;
}

double zeta(double y) {
  double u = 2.0 * y;
  return smooth_step(u + 1.0) - smooth_step(u - 1.0);
}

std::vector<std::pair<long, double>> zeta_weights(double y) {
  double u = 2.0 * y;
  long base = static_cast<long>(std::floor(y));
  std::vector<std::pair<long, double>> out;
  long lo = base - 2, hi = base + 2;
  double upper = smooth_step(u - (2.0 * lo - 1.0));
  for (long mu = lo; mu <= hi; ++mu) {
    double lower = smooth_step(u - (2.0 * mu + 1.0));
    double w = upper - lower;
    if (w != 0.0) out.emplace_back(mu, w);
    upper = lower;
  }
  return out;
}

std::vector<double> dyadic_band_weights(double r, int K) {
  std::vector<double> w(K + 1);
  const Cutoff& e = eta();
  double prev = e(r);
  w[0] = prev;
  for (int k = 1; k <= K; ++k) {
    double cur = e(std::ldexp(r, -k));
    w[k] = cur - prev;
    prev = cur;
  }
  return w;
}

double dyadic_band(double r, int k) {
  const Cutoff& e = eta();
  if (k == 0) return e(r);
  return e(std::ldexp(r, -k)) - e(std::ldexp(r, -k + 1));
}

}  // namespace curvelab
