#include "curvelab/curve.hpp"

#include <cmath>
#include <sstream>

namespace curvelab {
namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// d-th derivative of s^m: m!/(m-d)! s^{m-d} for d <= m, else 0.
double monomial_deriv(double s, int m, int d) {
  if (d > m) return 0.0;
  double coef = 1.0;
  for (int i = 0; i < d; ++i) coef *= (m - i);
  return coef * std::pow(s, m - d);
}

// d-th derivative of sin(w s): w^d sin(w s + d pi/2).
double sin_deriv(double s, double w, int d) {
  return std::pow(w, d) * std::sin(w * s + d * kPi / 2.0);
}

double cos_deriv(double s, double w, int d) {
  return std::pow(w, d) * std::cos(w * s + d * kPi / 2.0);
}

// d-th derivative of the degree-`pin` Taylor polynomial of sin(w s) at 0.
double sin_taylor_deriv(double s, double w, int pin, int d) {
  double acc = 0.0;
  for (int m = 1; m <= pin; m += 2) {
    int half = (m - 1) / 2;
    double sign = (half % 2 == 0) ? 1.0 : -1.0;
    double coef = sign * std::pow(w, m) / factorial(m);
    acc += coef * monomial_deriv(s, m, d);
  }
  return acc;
}

double cos_taylor_deriv(double s, double w, int pin, int d) {
  double acc = 0.0;
  for (int m = 0; m <= pin; m += 2) {
    double sign = ((m / 2) % 2 == 0) ? 1.0 : -1.0;
    double coef = sign * std::pow(w, m) / factorial(m);
    acc += coef * monomial_deriv(s, m, d);
  }
  return acc;
}

}  // namespace

MomentCurve::MomentCurve(int n) : n_(n) {
  if (n < 2 || n > kMaxDim) throw domain_error("moment curve dimension out of range");
}

Vec MomentCurve::derivative(double s, int order) const {
  Vec v = Vec::Zero(n_);
  for (int j = 1; j <= n_; ++j) {
    if (order <= j) v[j - 1] = std::pow(s, j - order) / factorial(j - order);
  }
  return v;
}

std::string MomentCurve::describe() const {
  std::ostringstream os;
  os << "moment(n=" << n_ << ")";
  return os.str();
}

PerturbedCurve::PerturbedCurve(int n, std::vector<PerturbationTerm> terms)
    : n_(n), terms_(std::move(terms)) {
  if (n < 2 || n > kMaxDim) throw domain_error("curve dimension out of range");
  for (const auto& t : terms_) {
    if (t.coordinate < 1 || t.coordinate > n_)
      throw domain_error("perturbation coordinate out of range");
  }
}

Vec PerturbedCurve::derivative(double s, int order) const {
  MomentCurve base(n_);
  Vec v = base.derivative(s, order);
  for (const auto& t : terms_) {
    double add = 0.0;
    switch (t.kind) {
      case PerturbationTerm::kMonomial:
        add = t.c * monomial_deriv(s, t.m, order);
        break;
      case PerturbationTerm::kSinMinusTaylor:
        add = t.c * (sin_deriv(s, t.w, order) - sin_taylor_deriv(s, t.w, t.pin, order));
        break;
      case PerturbationTerm::kCosMinusTaylor:
        add = t.c * (cos_deriv(s, t.w, order) - cos_taylor_deriv(s, t.w, t.pin, order));
        break;
      case PerturbationTerm::kSin:
        add = t.c * sin_deriv(s, t.w, order);
        break;
      case PerturbationTerm::kCos:
        add = t.c * cos_deriv(s, t.w, order);
        break;
    }
    v[t.coordinate - 1] += add;
  }
  return v;
}

std::string PerturbedCurve::describe() const {
  std::ostringstream os;
  os << "perturbed(n=" << n_ << ", terms=" << terms_.size() << ")";
  return os.str();
}

Mat gamma_matrix(const Curve& c, double s) {
  int n = c.dim();
  Mat m(n, n);
  for (int j = 1; j <= n; ++j) m.col(j - 1) = c.derivative(s, j);
  return m;
}

Mat gamma_matrix_scaled(const Curve& c, double s, double lambda) {
  Mat m = gamma_matrix(c, s);
  double p = 1.0;
  for (int j = 0; j < c.dim(); ++j) {
    p *= lambda;
    m.col(j) *= p;
  }
  return m;
}

RescaledCurve::RescaledCurve(CurvePtr base, double sigma, double lambda)
    : base_(std::move(base)), sigma_(sigma), lambda_(lambda) {
  if (lambda_ <= 0.0) throw domain_error("rescale lambda must be positive");
  origin_ = base_->derivative(sigma_, 0);
  Eigen::MatrixXd m = gamma_matrix_scaled(*base_, sigma_, lambda_);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  double cond = svd.singularValues()(0) /
                svd.singularValues()(svd.singularValues().size() - 1);
  if (!(cond < 1e8)) throw degeneracy_error("rescale frame condition number too large");
  lu_ = Eigen::PartialPivLU<Eigen::MatrixXd>(m);
}

Vec RescaledCurve::derivative(double s, int order) const {
  double t = sigma_ + lambda_ * s;
  Vec g = base_->derivative(t, order);
  if (order == 0) g -= origin_;
  Eigen::VectorXd rhs = std::pow(lambda_, order) * g;
  Eigen::VectorXd sol = lu_.solve(rhs);
  return sol;
}

std::string RescaledCurve::describe() const {
  std::ostringstream os;
  os << "rescaled(" << base_->describe() << ", sigma=" << sigma_
     << ", lambda=" << lambda_ << ")";
  return os.str();
}

ModelClassReport model_class_check(const Curve& c, double delta, int grid_points) {
  int n = c.dim();
  MomentCurve model(n);
  ModelClassReport rep{};
  rep.grid_points = grid_points;
  rep.deviation = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    double s = -1.0 + 2.0 * i / (grid_points - 1);
    for (int j = 1; j <= n + 1; ++j) {
      Vec d = c.derivative(s, j) - model.derivative(s, j);
      rep.deviation = std::max(rep.deviation, d.cwiseAbs().maxCoeff());
    }
    Vec d0 = c.derivative(s, 0) - model.derivative(s, 0);
    rep.deviation = std::max(rep.deviation, d0.cwiseAbs().maxCoeff());
  }
  rep.pin_error = c.derivative(0.0, 0).cwiseAbs().maxCoeff();
  for (int j = 1; j <= n; ++j) {
    Vec e = Vec::Zero(n);
    e[j - 1] = 1.0;
    rep.pin_error = std::max(rep.pin_error,
                             (c.derivative(0.0, j) - e).cwiseAbs().maxCoeff());
  }
  rep.member = rep.deviation <= delta;
  rep.normalized = rep.pin_error <= 1e-12;
  return rep;
}

FiniteTypeProfile finite_type_profile(const Curve& c, int d_max, int net_size,
                                      int s_grid) {
  int n = c.dim();
  // Deterministic sphere net: golden-ratio style low-discrepancy angles fed
  // through a normal transform would need an RNG; instead use a fixed lattice
  // on [0,1)^n mapped through erf-free shells.  A plain Halton lattice on the
  // cube, normalized to the sphere, suffices for a lower-bound sweep.
  std::vector<Vec> net;
  net.reserve(net_size);
  auto halton = [](int index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
      f /= base;
      r += f * (index % base);
      index /= base;
    }
    return r;
  };
  const int primes[6] = {2, 3, 5, 7, 11, 13};
  for (int i = 1; i <= net_size; ++i) {
    Vec v(n);
    for (int j = 0; j < n; ++j) v[j] = 2.0 * halton(i, primes[j]) - 1.0;
    double norm = v.norm();
    if (norm < 1e-8) continue;
    net.push_back(v / norm);
  }

  FiniteTypeProfile prof{};
  prof.maximal_type = 0;
  prof.min_c0 = 1e300;
  for (int i = 0; i < s_grid; ++i) {
    double s = -1.0 + 2.0 * i / (s_grid - 1);
    std::vector<Mat> dummy;
    std::vector<Vec> derivs(d_max);
    for (int j = 1; j <= d_max; ++j) derivs[j - 1] = c.derivative(s, j);
    int type = -1;
    double c0 = 0.0;
    for (int d = 1; d <= d_max && type < 0; ++d) {
      double worst = 1e300;
      for (const auto& xi : net) {
        double acc = 0.0;
        for (int j = 1; j <= d; ++j) acc += std::abs(derivs[j - 1].dot(xi));
        worst = std::min(worst, acc);
      }
      if (worst >= 1e-3) {
        type = d;
        c0 = worst;
      }
    }
    FiniteTypeSample smp{s, type, c0};
    prof.samples.push_back(smp);
    prof.maximal_type = std::max(prof.maximal_type, type);
    if (type > 0) prof.min_c0 = std::min(prof.min_c0, c0);
  }
  return prof;
}

}  // namespace curvelab
