#pragma once

#include <functional>
#include <vector>

#include "curvelab/common.hpp"

namespace curvelab {

// Gauss-Legendre rule on [-1, 1].
struct QuadRule {
  std::vector<double> x;
  std::vector<double> w;
};

// Cached; thread-safe.  n in [1, 256].
const QuadRule& gauss_legendre(int n);

template <typename F>
double integrate(F&& f, double a, double b, const QuadRule& rule) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (size_t q = 0; q < rule.x.size(); ++q)
    acc += rule.w[q] * f(mid + half * rule.x[q]);
  return half * acc;
}

template <typename F>
cplx integrate_c(F&& f, double a, double b, const QuadRule& rule) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  cplx acc = 0.0;
  for (size_t q = 0; q < rule.x.size(); ++q)
    acc += rule.w[q] * f(mid + half * rule.x[q]);
  return half * acc;
}

// Composite rule over `panels` equal panels.
template <typename F>
cplx integrate_composite(F&& f, double a, double b, int panels,
                         const QuadRule& rule) {
  cplx acc = 0.0;
  double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p)
    acc += integrate_c(f, a + p * h, a + (p + 1) * h, rule);
  return acc;
}

}  // namespace curvelab
