#pragma once

#include <memory>
#include <string>
#include <vector>

#include "curvelab/common.hpp"

namespace curvelab {

// A curve on [-1, 1] with analytic derivatives.  derivative(s, 0) is the
// point itself; orders up to max_order() must be exact, not differenced.
class Curve {
 public:
  virtual ~Curve() = default;
  virtual int dim() const = 0;
  virtual Vec derivative(double s, int order) const = 0;
  virtual int max_order() const { return dim() + 4; }
  virtual std::string describe() const = 0;
  Vec operator()(double s) const { return derivative(s, 0); }
};

using CurvePtr = std::shared_ptr<const Curve>;

// gamma_j(s) = s^j / j!
class MomentCurve : public Curve {
 public:
  explicit MomentCurve(int n);
  int dim() const override { return n_; }
  Vec derivative(double s, int order) const override;
  int max_order() const override { return 64; }
  std::string describe() const override;

 private:
  int n_;
};

// One additive perturbation term applied to a single coordinate.
struct PerturbationTerm {
  enum Kind {
    kMonomial,       // c * s^m
    kSinMinusTaylor, // c * (sin(w s) - degree-`pin` Taylor polynomial)
    kCosMinusTaylor, // c * (cos(w s) - degree-`pin` Taylor polynomial)
    kSin,            // c * sin(w s)
    kCos,            // c * cos(w s)
  };
  Kind kind;
  int coordinate;  // 1-based
  double c;
  double w = 1.0;  // frequency for trig kinds
  int m = 0;       // power for kMonomial
  int pin = 0;     // Taylor subtraction degree for the *MinusTaylor kinds
};

// Moment curve plus analytic perturbation terms.
class PerturbedCurve : public Curve {
 public:
  PerturbedCurve(int n, std::vector<PerturbationTerm> terms);
  int dim() const override { return n_; }
  Vec derivative(double s, int order) const override;
  int max_order() const override { return 32; }
  std::string describe() const override;
  const std::vector<PerturbationTerm>& terms() const { return terms_; }

 private:
  int n_;
  std::vector<PerturbationTerm> terms_;
};

// [gamma]_s: columns gamma^(j)(s), j = 1..n.
Mat gamma_matrix(const Curve& c, double s);

// [gamma]_{s,lambda} = [gamma]_s * diag(lambda, ..., lambda^n).
Mat gamma_matrix_scaled(const Curve& c, double s, double lambda);

// gamma_{sigma,lambda}(s) = [gamma]_{sigma,lambda}^{-1} (gamma(sigma + lambda s) - gamma(sigma)).
// Requires [sigma - lambda, sigma + lambda] inside the parent domain and an
// invertible [gamma]_sigma (condition cap 1e8).
class RescaledCurve : public Curve {
 public:
  RescaledCurve(CurvePtr base, double sigma, double lambda);
  int dim() const override { return base_->dim(); }
  Vec derivative(double s, int order) const override;
  int max_order() const override { return base_->max_order(); }
  std::string describe() const override;
  double sigma() const { return sigma_; }
  double lambda() const { return lambda_; }

 private:
  CurvePtr base_;
  double sigma_, lambda_;
  Vec origin_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

struct ModelClassReport {
  bool member;           // sampled C^{n+1} deviation <= delta
  bool normalized;       // gamma(0) = 0 and gamma^(j)(0) = e_j to 1e-12
  double deviation;      // max_j<=n+1 sup_s |gamma^(j) - moment^(j)| on the grid
  double pin_error;      // worst normalization defect at s = 0
  int grid_points;
};

ModelClassReport model_class_check(const Curve& c, double delta,
                                   int grid_points = 2001);

struct FiniteTypeSample {
  double s;
  int type;     // smallest d with sum_{j<=d} |<gamma^(j)(s), xi>| >= c0 |xi| over the net
  double c0;    // attained constant at that d
};

struct FiniteTypeProfile {
  std::vector<FiniteTypeSample> samples;
  int maximal_type;
  double min_c0;
};

// Brute force over a deterministic sphere net of `net_size` directions.
FiniteTypeProfile finite_type_profile(const Curve& c, int d_max,
                                      int net_size = 10000,
                                      int s_grid = 201);

}  // namespace curvelab
