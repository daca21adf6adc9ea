#include "curvelab/frenet.hpp"

#include <cmath>

#include "curvelab/rng.hpp"

namespace curvelab {

FrenetFrame frenet_frame(const Curve& c, double s) {
  int n = c.dim();
  Mat G = gamma_matrix(c, s);
  {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(G)};
    double smin = svd.singularValues()(n - 1);
    double smax = svd.singularValues()(0);
    if (!(smin > 0.0) || smax / smin > 1e8)
      throw degeneracy_error("derivative frame is numerically degenerate");
  }
  FrenetFrame f;
  f.E = G;
  f.R = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i < j; ++i) {
        double r = f.E.col(i).dot(f.E.col(j));
        f.R(i, j) += r;
        f.E.col(j) -= r * f.E.col(i);
      }
    }
    double nrm = f.E.col(j).norm();
    f.R(j, j) = nrm;
    f.E.col(j) /= nrm;
  }
  double defect = (f.E.transpose() * f.E - Mat::Identity(n, n))
                      .cwiseAbs()
                      .maxCoeff();
  if (defect > 1e-12) throw accuracy_error("frame orthonormality", defect);
  return f;
}

double frenet_decay_constant(const Curve& c, int pairs, double max_sep,
                             uint64_t seed) {
  Rng rng(seed);
  double cmax = 0.0;
  for (int t = 0; t < pairs; ++t) {
    double s1 = rng.uniform(-0.5, 0.5);
    double sep = rng.uniform(-max_sep, max_sep);
    double s2 = s1 + sep;
    if (s2 < -1.0 || s2 > 1.0 || std::abs(sep) < 1e-6) continue;
    FrenetFrame f1 = frenet_frame(c, s1);
    FrenetFrame f2 = frenet_frame(c, s2);
    Mat inner = f1.E.transpose() * f2.E;
    int n = c.dim();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double ratio = std::abs(inner(i, j)) /
                       std::pow(std::abs(sep), std::abs(i - j));
        cmax = std::max(cmax, ratio);
      }
  }
  return cmax;
}

double box_constant_needed(const Curve& c, double s, double r, int d,
                           const Vec& xi_normalized) {
  return box_constant_needed_two_scale(c, s, r, 1.0, d, xi_normalized);
}

double box_constant_needed_two_scale(const Curve& c, double s, double r1,
                                     double r2, int d,
                                     const Vec& xi_normalized) {
  int n = c.dim();
  FrenetFrame f = frenet_frame(c, s);
  double need = 0.0;
  for (int j = 1; j <= n; ++j) {
    double comp = std::abs(f.E.col(j - 1).dot(xi_normalized));
    if (j <= d) {
      need = std::max(need, comp / std::pow(r1, d + 1 - j));
    } else if (j == d + 1) {
      need = std::max(need, comp);
      if (comp <= 0.0) return 1e300;
      need = std::max(need, 0.5 / comp);
    } else {
      need = std::max(need, comp / std::pow(r2, j - d - 1));
    }
  }
  return need;
}

}  // namespace curvelab
