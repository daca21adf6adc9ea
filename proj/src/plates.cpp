#include "curvelab/plates.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "curvelab/frenet.hpp"
#include "curvelab/rng.hpp"

namespace curvelab {

namespace {

// Finite-difference weights for the m-th derivative at z from the given
// nodes (Fornberg's recursion).  Returns one weight per node.
std::vector<double> fd_weights(const std::vector<double>& x, double z, int m) {
  const int nn = static_cast<int>(x.size());
  std::vector<double> c(static_cast<std::size_t>(nn) * (m + 1), 0.0);
  auto C = [&](int i, int k) -> double& { return c[i * (m + 1) + k]; };
  double c1 = 1.0;
  double c4 = x[0] - z;
  C(0, 0) = 1.0;
  for (int i = 1; i < nn; ++i) {
    int mn = std::min(i, m);
    double c2 = 1.0;
    double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          C(i, k) = c1 * (k * C(i - 1, k - 1) - c5 * C(i - 1, k)) / c2;
        C(i, 0) = -c1 * c5 * C(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k)
        C(j, k) = (c4 * C(j, k) - k * C(j, k - 1)) / c3;
      C(j, 0) = c4 * C(j, 0) / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(nn);
  for (int i = 0; i < nn; ++i) w[i] = C(i, m);
  return w;
}

}  // namespace

ConeTuple::ConeTuple(CurvePtr curve, int d, TupleGrid grid)
    : curve_(std::move(curve)), d_(d), grid_(grid) {
  if (!curve_) throw config_error("cone tuple requires a curve");
  n_ = curve_->dim();
  if (d_ < 1 || d_ > n_ - 1)
    throw config_error("cone tuple dimension d must lie in [1, n-1]");
  if (!(grid_.lo < grid_.hi) || !(grid_.step > 0.0))
    throw config_error("cone tuple grid must have lo < hi and step > 0");
  if (grid_.stencil < d_ + 2)
    throw config_error("cone tuple stencil too short for requested dimension");

  int count = static_cast<int>(std::floor((grid_.hi - grid_.lo) / grid_.step)) + 1;
  if (count < grid_.stencil)
    throw config_error("cone tuple grid has fewer nodes than the stencil");
  nodes_.resize(count);
  values_.resize(count);
  const int m = n_ - d_;
  for (int i = 0; i < count; ++i) {
    double s = grid_.lo + i * grid_.step;
    nodes_[i] = s;
    FrenetFrame f = frenet_frame(*curve_, s);
    Mat lower = f.E.block(d_, d_, m, m);
    Eigen::JacobiSVD<Mat> svd(lower);
    double smin = svd.singularValues().minCoeff();
    double smax = svd.singularValues().maxCoeff();
    if (!(smin > 0.0) || smax / smin > 1e8)
      throw degeneracy_error("frame block is numerically singular; cone tuple undefined");
    Mat a_inv = lower.partialPivLu().solve(Mat::Identity(m, m));
    values_[i] = f.E.block(0, d_, d_, m) * a_inv;
  }
}

Mat ConeTuple::tabulated(double s, int order) const {
  if (s < grid_.lo - 1e-12 || s > grid_.hi + 1e-12)
    throw domain_error("parameter outside the tabulated tuple interval");
  const int count = static_cast<int>(nodes_.size());
  const int p = std::min(grid_.stencil, count);
  int center = static_cast<int>(std::lround((s - grid_.lo) / grid_.step));
  int first = std::clamp(center - p / 2, 0, count - p);
  std::vector<double> xs(nodes_.begin() + first, nodes_.begin() + first + p);
  std::vector<double> w = fd_weights(xs, s, order);
  Mat out = Mat::Zero(d_, n_ - d_);
  for (int i = 0; i < p; ++i) out += w[i] * values_[first + i];
  return out;
}

Mat ConeTuple::g(double s) const { return tabulated(s, 0); }

Mat ConeTuple::g_derivative(double s, int order) const {
  if (order < 1) throw config_error("derivative order must be >= 1");
  return tabulated(s, order);
}

Vec ConeTuple::g_a(const Vec& a, double s) const {
  if (a.size() != n_ - d_)
    throw config_error("weight vector must have length n - d");
  return g(s) * a;
}

Vec ConeTuple::g_a_derivative(const Vec& a, double s, int order) const {
  if (a.size() != n_ - d_)
    throw config_error("weight vector must have length n - d");
  return g_derivative(s, order) * a;
}

Mat ConeTuple::slab_matrix(const Vec& a, double s, double r) const {
  if (!(r > 0.0)) throw config_error("slab radius must be positive");
  Mat out(d_, d_);
  double rk = 1.0;
  for (int k = 1; k <= d_; ++k) {
    rk *= r;
    out.col(k - 1) = g_a_derivative(a, s, k) * rk;
  }
  return out;
}

void ConeTuple::validate_weights(const Vec& a) const {
  if (a.size() != n_ - d_)
    throw config_error("weight vector must have length n - d");
  if (!(a[0] >= 0.25 && a[0] <= 2.0))
    throw config_error("leading weight a_{d+1} must lie in [1/4, 2]");
  for (int j = 1; j < a.size(); ++j)
    if (!(std::abs(a[j]) <= 2.0))
      throw config_error("trailing weights must satisfy |a_j| <= 2");
}

double ConeTuple::min_generator_determinant(const Vec& a, double lo,
                                            double hi) const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i] < lo || nodes_[i] > hi) continue;
    best = std::min(best, std::abs(slab_matrix(a, nodes_[i], 1.0).determinant()));
  }
  return best;
}

double Slab::box_slack_needed(const Vec& xi) const {
  Vec w = matrix.partialPivLu().solve(xi - center);
  return w.cwiseAbs().maxCoeff() / 2.0;
}

double Slab::scale_slack_needed(const Vec& xi) const {
  Vec w = matrix.partialPivLu().solve(xi - center);
  double c = 0.0;
  for (int j = 0; j < d; ++j)
    c = std::max(c, std::pow(std::abs(w[j]) / 2.0, 1.0 / (j + 1)));
  return c;
}

bool Slab::contains(const Vec& xi, double slack) const {
  return box_slack_needed(xi) <= slack;
}

Slab make_slab(const ConeTuple& tuple, const Vec& a, double s, double r) {
  Slab out;
  out.d = tuple.d();
  out.s = s;
  out.r = r;
  out.center = tuple.g_a(a, s);
  out.matrix = tuple.slab_matrix(a, s, r);
  return out;
}

Slab make_slab(const Curve& generator, double s, double r) {
  if (!(r > 0.0)) throw config_error("slab radius must be positive");
  Slab out;
  out.d = generator.dim();
  out.s = s;
  out.r = r;
  out.center = generator(s);
  out.matrix.resize(out.d, out.d);
  double rk = 1.0;
  for (int k = 1; k <= out.d; ++k) {
    rk *= r;
    out.matrix.col(k - 1) = generator.derivative(s, k) * rk;
  }
  return out;
}

double Plate::box_slack_needed(const Vec& xi) const {
  Vec w = matrix.partialPivLu().solve(xi);
  return w.cwiseAbs().maxCoeff() / 2.0;
}

bool Plate::cube_contains(const Vec& xi) const {
  for (int j = d; j < n; ++j)
    if (std::abs(xi[j] - a[j - d]) > 1.0 / K) return false;
  return true;
}

bool Plate::contains(const Vec& xi, double slack) const {
  return cube_contains(xi) && box_slack_needed(xi) <= slack;
}

Plate make_plate(const ConeTuple& tuple, const Vec& a, double K, double s,
                 double r) {
  tuple.validate_weights(a);
  if (!(K >= 1.0)) throw config_error("truncation parameter K must be >= 1");
  Plate out;
  out.n = tuple.n();
  out.d = tuple.d();
  out.s = s;
  out.r = r;
  out.K = K;
  out.a = a;
  const int m = out.n - out.d;
  out.matrix = Mat::Zero(out.n, out.n);
  out.matrix.topLeftCorner(out.d, out.d) = tuple.slab_matrix(a, s, r);
  out.matrix.topRightCorner(out.d, m) = tuple.g(s);
  out.matrix.bottomRightCorner(m, m) = Mat::Identity(m, m);
  return out;
}

std::vector<Plate> plate_decomposition(const ConeTuple& tuple, const Vec& a,
                                       double K, double r, double lo,
                                       double hi) {
  if (!(r > 0.0)) throw config_error("plate scale r must be positive");
  if (!(lo <= hi)) throw config_error("plate interval must have lo <= hi");
  std::vector<Plate> out;
  int i_lo = static_cast<int>(std::ceil(lo / r - 1e-12));
  int i_hi = static_cast<int>(std::floor(hi / r + 1e-12));
  for (int i = i_lo; i <= i_hi; ++i)
    out.push_back(make_plate(tuple, a, K, i * r, r));
  return out;
}

LorentzResiduals lorentz_identity_check(const ConeTuple& tuple, const Vec& a,
                                        double b, double rho, double s,
                                        double r) {
  if (!(r > 0.0 && rho > 0.0 && r <= rho && rho <= 1.0))
    throw config_error("rescaling requires 0 < r <= rho <= 1");
  const int d = tuple.d();
  Mat base = tuple.slab_matrix(a, b, rho);
  Eigen::PartialPivLU<Mat> lu(base);

  // Rescaled tuple about (b, rho), evaluated at the preimage of s.  Its
  // derivatives are parent derivatives at the mapped point pushed through
  // the inverse generator factor.
  double x = (s - b) / rho;
  double sx = b + rho * x;
  double h = r / rho;

  Mat right(d, d);
  double rho_k = 1.0, h_k = 1.0;
  for (int k = 1; k <= d; ++k) {
    rho_k *= rho;
    h_k *= h;
    Vec col = lu.solve(tuple.g_a_derivative(a, sx, k)) * rho_k;
    right.col(k - 1) = col * h_k;
  }
  Mat lhs_m = base * right;
  Mat rhs_m = tuple.slab_matrix(a, s, r);
  double res_m =
      (lhs_m - rhs_m).cwiseAbs().maxCoeff() / rhs_m.cwiseAbs().maxCoeff();

  Mat rescaled_value = lu.solve(tuple.g(sx) - tuple.g(b));
  Mat lhs_c = base * rescaled_value + tuple.g(b);
  Mat rhs_c = tuple.g(s);
  double res_c = (lhs_c - rhs_c).cwiseAbs().maxCoeff() /
                 std::max(1.0, rhs_c.cwiseAbs().maxCoeff());
  return {res_m, res_c};
}

PlateProjectionAudit plate_projection_audit(const ConeTuple& tuple,
                                            const Vec& a, double K,
                                            int samples_per_plate,
                                            std::uint64_t seed, double lo,
                                            double hi) {
  const int d = tuple.d();
  const int n = tuple.n();
  double rho = std::pow(K, -1.0 / d);
  std::vector<Plate> plates = plate_decomposition(tuple, a, K, rho, lo, hi);
  Rng rng(seed, 71);
  PlateProjectionAudit audit;
  audit.plates = static_cast<int>(plates.size());
  Vec eta(n), xi_top(d);
  for (const Plate& plate : plates) {
    Slab slab = make_slab(tuple, a, plate.s, rho);
    for (int t = 0; t < samples_per_plate; ++t) {
      for (int j = 0; j < d; ++j) eta[j] = rng.uniform(-2.0, 2.0);
      for (int j = d; j < n; ++j)
        eta[j] = a[j - d] + rng.uniform(-1.0, 1.0) / K;
      Vec xi = plate.matrix * eta;
      xi_top = xi.head(d);
      audit.max_constant =
          std::max(audit.max_constant, slab.scale_slack_needed(xi_top));
      ++audit.samples;
    }
  }
  return audit;
}

}  // namespace curvelab
