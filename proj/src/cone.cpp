#include "curvelab/cone.hpp"

#include <cmath>

#include "curvelab/frenet.hpp"

namespace curvelab {
namespace {

// Root of f = <gamma^(order)(s), xi> on [lo, hi] given f(lo) < 0 < f(hi)
// or f(lo) > 0 > f(hi); Newton polish with derivative <gamma^(order+1), xi>.
double bracketed_root(const Curve& c, const Vec& xi, int order, double lo,
                      double hi) {
  auto f = [&](double s) { return c.derivative(s, order).dot(xi); };
  auto df = [&](double s) { return c.derivative(s, order + 1).dot(xi); };
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw domain_error("root bracket carries no sign change");
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (fm == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((fm > 0.0) == (fhi > 0.0)) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
    if (hi - lo < 1e-13) break;
  }
  double s = 0.5 * (lo + hi);
  double scale = xi.norm();
  for (int it = 0; it < 12; ++it) {
    double fs = f(s);
    if (std::abs(fs) <= 1e-14 * scale) break;
    double d = df(s);
    if (d == 0.0) break;
    double step = fs / d;
    double next = s - step;
    if (next < lo - 1e-9 || next > hi + 1e-9) break;
    s = next;
    if (std::abs(step) < 1e-16) break;
  }
  if (!(std::abs(f(s)) <= 1e-12 * scale))
    throw convergence_error("root residual exceeds tolerance");
  return s;
}

}  // namespace

bool admissible(const Vec& xi, double spread) {
  int n = static_cast<int>(xi.size());
  double last = xi[n - 1];
  if (!(last > 0.0)) return false;
  for (int j = 0; j < n - 1; ++j)
    if (std::abs(xi[j]) > spread * last) return false;
  return true;
}

double theta_root(const Curve& c, const Vec& xi) {
  return pairing_root(c, xi, c.dim() - 1);
}

double pairing_root(const Curve& c, const Vec& xi, int order) {
  auto f = [&](double s) { return c.derivative(s, order).dot(xi); };
  double flo = f(-1.0), fhi = f(1.0);
  if (flo != 0.0 && fhi != 0.0 && (flo > 0.0) == (fhi > 0.0))
    throw domain_error("derivative pairing has no sign change in window");
  return bracketed_root(c, xi, order, -1.0, 1.0);
}

ConeRoots cone_roots(const Curve& c, const Vec& xi) {
  if (c.dim() != 4) throw domain_error("cone root data requires dim 4");
  ConeRoots r;
  double scale = xi.norm();
  r.theta2 = theta_root(c, xi);
  r.residual_theta2 = std::abs(c.derivative(r.theta2, 3).dot(xi));
  r.u12 = c.derivative(r.theta2, 1).dot(xi);
  r.u2 = c.derivative(r.theta2, 2).dot(xi);
  r.degenerate = std::abs(r.u2) <= 1e-12 * scale;
  if (r.degenerate || r.u2 > 0.0) {
    if (r.degenerate) {
      r.theta1_minus = r.theta1_plus = r.theta2;
      r.theta1 = r.theta2;
    }
    return r;
  }
  // u2 < 0: the second-derivative pairing is convex with a negative minimum
  // at theta2, so there is one root on each side when the endpoint values
  // are positive.
  auto h = [&](double s) { return c.derivative(s, 2).dot(xi); };
  if (!(h(-1.0) > 0.0) || !(h(1.0) > 0.0))
    throw domain_error("second-derivative roots escape the window");
  r.has_theta1 = true;
  r.theta1_minus = bracketed_root(c, xi, 2, -1.0, r.theta2);
  r.theta1_plus = bracketed_root(c, xi, 2, r.theta2, 1.0);
  r.residual_theta1 = std::max(std::abs(h(r.theta1_minus)),
                               std::abs(h(r.theta1_plus)));
  r.u1_minus = c.derivative(r.theta1_minus, 1).dot(xi);
  r.u1_plus = c.derivative(r.theta1_plus, 1).dot(xi);
  r.u31_minus = c.derivative(r.theta1_minus, 3).dot(xi);
  r.u31_plus = c.derivative(r.theta1_plus, 3).dot(xi);
  double am = std::abs(r.u1_minus), ap = std::abs(r.u1_plus);
  r.tie = (am == ap);
  if (ap <= am) {
    r.branch = +1;
    r.u1 = r.u1_plus;
    r.theta1 = r.theta1_plus;
  } else {
    r.branch = -1;
    r.u1 = r.u1_minus;
    r.theta1 = r.theta1_minus;
  }
  return r;
}

Vec moment_worst_cone(int n, double tau) {
  Vec xi(n);
  double fact = 1.0;
  for (int i = n; i >= 1; --i) {
    int p = n - i;
    if (p > 0) fact *= p;
    xi[i - 1] = std::pow(-tau, p) / fact;
  }
  return xi;
}

namespace {

WorstConePoint worst_cone_newton(const Curve& c, double tau, double s0,
                                 const Vec& xi0) {
  int n = c.dim();
  WorstConePoint wp;
  wp.tau = tau;
  wp.xi = xi0;
  wp.xi[n - 2] = -tau;
  wp.xi[n - 1] = 1.0;
  wp.s = s0;
  wp.continuation_used = false;
  wp.iterations = 0;

  int unknowns = n - 1;  // s and xi_1..xi_{n-2}
  for (int it = 0; it < 60; ++it) {
    wp.iterations = it + 1;
    Eigen::VectorXd F(unknowns);
    Eigen::MatrixXd J(unknowns, unknowns);
    for (int j = 1; j <= n - 1; ++j) {
      Vec gj = c.derivative(wp.s, j);
      F(j - 1) = gj.dot(wp.xi);
      J(j - 1, 0) = c.derivative(wp.s, j + 1).dot(wp.xi);
      for (int i = 1; i <= n - 2; ++i) J(j - 1, i) = gj[i - 1];
    }
    double scale = wp.xi.norm();
    if (F.cwiseAbs().maxCoeff() <= 1e-13 * scale) return wp;
    Eigen::VectorXd dx = J.partialPivLu().solve(-F);
    wp.s += dx(0);
    for (int i = 1; i <= n - 2; ++i) wp.xi[i - 1] += dx(i);
    if (std::abs(wp.s) > 2.0 || !std::isfinite(wp.s))
      throw convergence_error("worst-cone iteration left the window");
  }
  Eigen::VectorXd F(unknowns);
  for (int j = 1; j <= n - 1; ++j) F(j - 1) = c.derivative(wp.s, j).dot(wp.xi);
  if (F.cwiseAbs().maxCoeff() <= 1e-12 * wp.xi.norm()) return wp;
  throw convergence_error("worst-cone iteration stalled");
}

}  // namespace

WorstConePoint worst_cone(const Curve& c, double tau, double tau_max) {
  if (std::abs(tau) > tau_max)
    throw domain_error("worst-cone parameter beyond configured range");
  int n = c.dim();
  Vec guess = moment_worst_cone(n, tau);
  try {
    return worst_cone_newton(c, tau, tau, guess);
  } catch (const convergence_error&) {
    // continuation from tau = 0 in short steps, warm-starting each solve
    int steps = 16;
    WorstConePoint wp;
    wp.xi = moment_worst_cone(n, 0.0);
    wp.s = 0.0;
    for (int k = 1; k <= steps; ++k) {
      double t = tau * k / steps;
      wp = worst_cone_newton(c, t, wp.s, wp.xi);
    }
    wp.continuation_used = true;
    return wp;
  }
}

double phi_value(const Curve& c, const Vec& xi) {
  double th = theta_root(c, xi);
  return c.derivative(th, 0).dot(xi);
}

Vec phi_gradient(const Curve& c, const Vec& xi) {
  int n = c.dim();
  double th = theta_root(c, xi);
  double denom = c.derivative(th, n).dot(xi);
  if (denom == 0.0) throw degeneracy_error("top derivative pairing vanishes at root");
  double u = c.derivative(th, 1).dot(xi);
  Vec grad = c.derivative(th, 0) - (u / denom) * c.derivative(th, n - 1);
  return grad;
}

PacketCenter packet_center(const Curve& c, double lambda, long nu) {
  int n = c.dim();
  PacketCenter p;
  p.nu = nu;
  double tau = nu * std::pow(lambda, -1.0 / n);
  WorstConePoint wp = worst_cone(c, tau, 0.5);
  p.xi_nu = lambda * wp.xi;
  p.phi = phi_value(c, p.xi_nu);
  p.x_nu = -phi_gradient(c, p.xi_nu);
  return p;
}

SeparationReport separation_audit(const Curve& c, double lambda,
                                  double epsilon) {
  int n = c.dim();
  double lam_root = std::pow(lambda, 1.0 / n);
  long m = static_cast<long>(std::floor(epsilon * lam_root));
  SeparationReport rep;
  rep.widened = m < 2;
  if (m < 2) m = 2;
  rep.effective_epsilon = m / lam_root;
  std::vector<PacketCenter> centers;
  for (long nu = -m; nu <= m; ++nu)
    centers.push_back(packet_center(c, lambda, nu));
  rep.packet_count = static_cast<int>(centers.size());
  double score = 1e300;
  for (size_t a = 0; a < centers.size(); ++a)
    for (size_t b = a + 1; b < centers.size(); ++b) {
      double dist = (centers[a].x_nu - centers[b].x_nu).norm();
      double gap = std::abs(double(centers[a].nu - centers[b].nu));
      score = std::min(score, dist * lam_root / gap);
    }
  rep.score = score;
  return rep;
}

DerivativeAudit derivative_bound_audit(
    const Curve& c, int k, int l,
    const std::vector<std::pair<Vec, double>>& samples) {
  DerivativeAudit audit{0.0, 0, 0};
  // quantity scales at (k, l)
  const double s_theta2 = std::ldexp(1.0, -l);
  const double s_u2 = std::ldexp(1.0, k - 2 * l);
  const double s_u12 = std::ldexp(1.0, k - 3 * l);
  for (const auto& [xi, s_mu] : samples) {
    FrenetFrame frame = frenet_frame(c, s_mu);
    for (int j = 1; j <= 4; ++j) {
      int drop = k - (4 - j) * l;  // per-derivative decay exponent
      double h = std::ldexp(1.0, drop) / 16.0;
      if (h < 1e-290 || h > 0.25 * xi.norm()) {
        ++audit.skipped;
        continue;
      }
      Vec v = frame.E.col(j - 1);
      ConeRoots r0, rp, rm;
      try {
        r0 = cone_roots(c, xi);
        rp = cone_roots(c, xi + h * v);
        rm = cone_roots(c, xi - h * v);
      } catch (const domain_error&) {
        ++audit.skipped;
        continue;
      } catch (const convergence_error&) {
        ++audit.skipped;
        continue;
      }
      ++audit.evaluated;
      double bound = std::ldexp(1.0, -drop);
      auto push = [&](double qp, double q0, double qm, double qscale) {
        double d1 = std::abs(qp - qm) / (2.0 * h);
        double d2 = std::abs(qp - 2.0 * q0 + qm) / (h * h);
        audit.max_ratio = std::max(audit.max_ratio, d1 / qscale / bound);
        audit.max_ratio =
            std::max(audit.max_ratio, d2 / qscale / (bound * bound));
      };
      push(rp.theta2, r0.theta2, rm.theta2, s_theta2);
      push(rp.u2, r0.u2, rm.u2, s_u2);
      push(rp.u12, r0.u12, rm.u12, s_u12);
    }
  }
  return audit;
}

}  // namespace curvelab
