#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace curvelab {

// Ambient dimensions stay tiny (n <= 4 in every experiment); fixed capacity
// keeps the small vectors on the stack.
inline constexpr int kMaxDim = 6;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;
using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

struct domain_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct degeneracy_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct convergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct accuracy_error : std::runtime_error {
  double achieved;
  accuracy_error(const std::string& msg, double bound)
      : std::runtime_error(msg), achieved(bound) {}
};
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct budget_error : std::runtime_error {
  std::int64_t required_bytes;
  std::int64_t budget_bytes;
  budget_error(const std::string& msg, std::int64_t req = 0,
               std::int64_t cap = 0)
      : std::runtime_error(msg), required_bytes(req), budget_bytes(cap) {}
};

}  // namespace curvelab
