#include "curvelab/oscillatory.hpp"

#include <cmath>

#include "curvelab/quadrature.hpp"

namespace curvelab {
namespace {

constexpr double kLambdaCap = 262144.0;  // 2^18
constexpr int64_t kMaxReferenceNodes = int64_t(1) << 26;

double oscillation_count(const PhaseFn& phase, double a, double b,
                         int samples = 512) {
  double acc = 0.0;
  double h = (b - a) / samples;
  double prev = std::abs(phase.d1(a));
  for (int i = 1; i <= samples; ++i) {
    double cur = std::abs(phase.d1(a + i * h));
    acc += 0.5 * (prev + cur) * h;
    prev = cur;
  }
  return acc / (2.0 * kPi);
}

struct AdaptiveState {
  const std::function<double(double)>* amp;
  const PhaseFn* phase;
  const OscQuadOptions* opt;
  cplx value = 0.0;
  double err = 0.0;
  int64_t evals = 0;
  bool depth_capped = false;
};

cplx panel(AdaptiveState& st, double a, double b, const QuadRule& rule) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  cplx acc = 0.0;
  for (size_t q = 0; q < rule.x.size(); ++q) {
    double s = mid + half * rule.x[q];
    double am = (*st.amp)(s);
    if (am != 0.0) {
      double ph = st.phase->value(s);
      acc += rule.w[q] * am * cplx(std::cos(ph), std::sin(ph));
    }
  }
  st.evals += static_cast<int64_t>(rule.x.size());
  return half * acc;
}

void adapt(AdaptiveState& st, double a, double b, double tol_local,
           int depth) {
  double width = b - a;
  double dmax = 0.0;
  for (int i = 0; i <= 8; ++i)
    dmax = std::max(dmax, std::abs(st.phase->d1(a + width * i / 8.0)));

  cplx coarse, fine;
  if (dmax * width < 1.0) {
    coarse = panel(st, a, b, gauss_legendre(8));
    fine = panel(st, a, b, gauss_legendre(16));
  } else {
    coarse = panel(st, a, b, gauss_legendre(16));
    double mid = 0.5 * (a + b);
    fine = panel(st, a, mid, gauss_legendre(16)) +
           panel(st, mid, b, gauss_legendre(16));
  }
  double err = std::abs(fine - coarse);
  if (err <= tol_local || depth >= st.opt->max_depth || width < 1e-14) {
    st.value += fine;
    st.err += err;
    if (err > tol_local) st.depth_capped = true;
    return;
  }
  double mid = 0.5 * (a + b);
  adapt(st, a, mid, 0.5 * tol_local, depth + 1);
  adapt(st, mid, b, 0.5 * tol_local, depth + 1);
}

}  // namespace

OscillatoryResult oscillatory_reference(
    const std::function<double(double)>& amp, const PhaseFn& phase, double a,
    double b, const OscQuadOptions& opt) {
  const QuadRule& rule = gauss_legendre(opt.panel_nodes);
  double osc = oscillation_count(phase, a, b);
  int64_t want_nodes =
      std::max<int64_t>(64, static_cast<int64_t>(osc * opt.nodes_per_osc) + 1);
  if (want_nodes > kMaxReferenceNodes)
    throw budget_error("reference quadrature node count beyond budget",
                       want_nodes, kMaxReferenceNodes);
  int panels =
      std::max<int>(4, static_cast<int>(want_nodes / opt.panel_nodes) + 1);

  auto f = [&](double s) -> cplx {
    double am = amp(s);
    if (am == 0.0) return 0.0;
    double ph = phase.value(s);
    return am * cplx(std::cos(ph), std::sin(ph));
  };

  int64_t evals = 0;
  cplx prev = integrate_composite(f, a, b, panels, rule);
  evals += int64_t(panels) * opt.panel_nodes;
  double diff = 0.0;
  for (int d = 0; d < opt.max_doublings; ++d) {
    if (int64_t(panels) * 2 * opt.panel_nodes > kMaxReferenceNodes)
      throw budget_error("reference quadrature node count beyond budget",
                         int64_t(panels) * 2 * opt.panel_nodes,
                         kMaxReferenceNodes);
    panels *= 2;
    cplx cur = integrate_composite(f, a, b, panels, rule);
    evals += int64_t(panels) * opt.panel_nodes;
    diff = std::abs(cur - prev);
    if (diff <= opt.tol / opt.richardson_safety)
      return {cur, diff, evals};
    prev = cur;
  }
  throw accuracy_error("reference quadrature did not settle", diff);
}

OscillatoryResult oscillatory_adaptive(
    const std::function<double(double)>& amp, const PhaseFn& phase, double a,
    double b, const OscQuadOptions& opt) {
  AdaptiveState st;
  st.amp = &amp;
  st.phase = &phase;
  st.opt = &opt;
  // Pre-split so each root interval carries a bounded oscillation count.
  double osc = oscillation_count(phase, a, b);
  int parts = std::max(1, static_cast<int>(osc / 64.0));
  double h = (b - a) / parts;
  for (int p = 0; p < parts; ++p)
    adapt(st, a + p * h, a + (p + 1) * h, opt.tol / (2.0 * parts), 0);
  if (st.depth_capped && st.err > opt.tol)
    throw accuracy_error("adaptive quadrature hit depth cap", st.err);
  return {st.value, st.err, st.evals};
}

cplx eval_mu_hat(const Curve& c, const Cutoff& chi, const Vec& xi,
                 const OscQuadOptions& opt, OscRoute route) {
  double lambda = xi.norm();
  if (lambda > kLambdaCap)
    throw budget_error("frequency magnitude beyond direct quadrature range",
                       static_cast<int64_t>(lambda),
                       static_cast<int64_t>(kLambdaCap));
  PhaseFn phase;
  phase.value = [&c, xi](double s) { return -c.derivative(s, 0).dot(xi); };
  phase.d1 = [&c, xi](double s) { return -c.derivative(s, 1).dot(xi); };
  auto amp = [&chi](double s) { return chi(s); };
  double b = chi.support();
  OscillatoryResult r = (route == OscRoute::kReference)
                            ? oscillatory_reference(amp, phase, -b, b, opt)
                            : oscillatory_adaptive(amp, phase, -b, b, opt);
  return r.value;
}

cplx eval_multiplier(const Curve& c,
                     const std::function<double(double)>& s_profile,
                     const Cutoff& chi, const Vec& xi,
                     const OscQuadOptions& opt, OscRoute route) {
  double lambda = xi.norm();
  if (lambda > kLambdaCap)
    throw budget_error("frequency magnitude beyond direct quadrature range",
                       static_cast<int64_t>(lambda),
                       static_cast<int64_t>(kLambdaCap));
  PhaseFn phase;
  phase.value = [&c, xi](double s) { return -c.derivative(s, 0).dot(xi); };
  phase.d1 = [&c, xi](double s) { return -c.derivative(s, 1).dot(xi); };
  auto amp = [&](double s) { return s_profile(s) * chi(s); };
  double b = chi.support();
  OscillatoryResult r = (route == OscRoute::kReference)
                            ? oscillatory_reference(amp, phase, -b, b, opt)
                            : oscillatory_adaptive(amp, phase, -b, b, opt);
  return r.value;
}

cplx model_integral(int n, double lambda, const Cutoff& amp, const Vec& w,
                    double g, const OscQuadOptions& opt, OscRoute route) {
  if (n < 2 || n > kMaxDim) throw domain_error("model integral degree out of range");
  if (w.size() != n - 1) throw domain_error("model integral needs n-1 lower coefficients");
  if (lambda > kLambdaCap)
    throw budget_error("model integral frequency beyond direct quadrature range",
                       static_cast<int64_t>(lambda),
                       static_cast<int64_t>(kLambdaCap));
  PhaseFn phase;
  phase.value = [=](double s) {
    double p = g;
    p = p * s + 1.0;  // coefficient of s^n
    for (int j = n - 1; j >= 1; --j) p = p * s + w[j - 1];
    return lambda * p * s;
  };
  phase.d1 = [=](double s) {
    double p = (n + 1) * g;
    p = p * s + n;
    for (int j = n - 1; j >= 1; --j) p = p * s + j * w[j - 1];
    return lambda * p;
  };
  auto a = [&amp](double s) { return amp(s); };
  double b = std::min(1.0, amp.support());
  OscillatoryResult r = (route == OscRoute::kReference)
                            ? oscillatory_reference(a, phase, -b, b, opt)
                            : oscillatory_adaptive(a, phase, -b, b, opt);
  return r.value;
}

cplx stationary_phase_constant(int n) {
  if (n < 2) throw domain_error("stationary phase degree out of range");
  double mag = (2.0 / n) * std::tgamma(1.0 / n);
  if (n % 2 == 1) return mag * std::sin((n - 1) * kPi / (2.0 * n));
  double arg = kPi / (2.0 * n);
  return mag * cplx(std::cos(arg), std::sin(arg));
}

MuHatBatch mu_hat_batch_nodes(const Curve& c, const Cutoff& chi,
                              double lambda_max, double nodes_per_osc,
                              int panel_nodes) {
  double b = chi.support();
  double speed = 0.0;
  for (int i = 0; i <= 1024; ++i) {
    double s = -b + 2.0 * b * i / 1024.0;
    speed = std::max(speed, c.derivative(s, 1).norm());
  }
  double osc = lambda_max * speed * (2.0 * b) / (2.0 * kPi);
  int64_t want = std::max<int64_t>(64, static_cast<int64_t>(osc * nodes_per_osc) + 1);
  int panels = static_cast<int>(want / panel_nodes) + 1;
  const QuadRule& rule = gauss_legendre(panel_nodes);

  MuHatBatch batch;
  int64_t q_total = int64_t(panels) * panel_nodes;
  batch.s.resize(q_total);
  batch.chiw.resize(q_total);
  batch.gamma_nodes.resize(c.dim(), q_total);
  double h = 2.0 * b / panels;
  int64_t q = 0;
  for (int p = 0; p < panels; ++p) {
    double mid = -b + (p + 0.5) * h, half = 0.5 * h;
    for (int i = 0; i < panel_nodes; ++i, ++q) {
      double s = mid + half * rule.x[i];
      batch.s[q] = s;
      batch.chiw[q] = chi(s) * rule.w[i] * half;
      batch.gamma_nodes.col(q) = c.derivative(s, 0);
    }
  }
  return batch;
}

cplx mu_hat_from_batch(const MuHatBatch& batch, const Vec& xi) {
  const int64_t q_total = static_cast<int64_t>(batch.s.size());
  cplx acc = 0.0;
  for (int64_t q = 0; q < q_total; ++q) {
    double w = batch.chiw[q];
    if (w == 0.0) continue;
    double ph = -batch.gamma_nodes.col(q).dot(xi);
    acc += w * cplx(std::cos(ph), std::sin(ph));
  }
  return acc;
}

double cutoff_mass(const Cutoff& chi) {
  double b = chi.support();
  const QuadRule& rule = gauss_legendre(32);
  double acc = 0.0;
  for (int p = 0; p < 8; ++p) {
    double a0 = -b + 2.0 * b * p / 8.0, b0 = -b + 2.0 * b * (p + 1) / 8.0;
    acc += integrate([&chi](double s) { return chi(s); }, a0, b0, rule);
  }
  return acc;
}

}  // namespace curvelab
