#include "curvelab/symbols.hpp"

#include <cmath>

#include "curvelab/frenet.hpp"

namespace curvelab {

RegionParams RegionParams::defaults() {
  RegionParams p;
  p.delta = {p.delta0, p.delta0 * p.delta0 * p.delta0, p.delta0, 0.9};
  return p;
}

double min_pairing(const Curve& c, const Vec& xi, int order, double window) {
  auto f = [&](double s) { return c.derivative(s, order).dot(xi); };
  const int grid = 257;
  double best = 1e300, best_s = -window;
  double prev = f(-window);
  best = std::abs(prev);
  for (int i = 1; i < grid; ++i) {
    double s = -window + 2.0 * window * i / (grid - 1);
    double cur = f(s);
    if ((prev > 0.0) != (cur > 0.0)) return 0.0;
    if (std::abs(cur) < best) {
      best = std::abs(cur);
      best_s = s;
    }
    prev = cur;
  }
  // ternary refinement of |f| around the grid minimizer
  double h = 2.0 * window / (grid - 1);
  double lo = std::max(-window, best_s - h), hi = std::min(window, best_s + h);
  for (int it = 0; it < 80; ++it) {
    double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (std::abs(f(m1)) < std::abs(f(m2)))
      hi = m2;
    else
      lo = m1;
  }
  return std::min(best, std::abs(f(0.5 * (lo + hi))));
}

RegionWeights classify_region(const Curve& c, const Vec& xi,
                              const RegionParams& params) {
  int n = c.dim();
  if (static_cast<int>(params.delta.size()) < n)
    throw config_error("region thresholds missing for some derivative order");
  Vec unit = xi / xi.norm();
  RegionWeights w;
  w.chi.resize(n);
  std::vector<double> rho(n);
  for (int j = 1; j <= n; ++j) {
    double m = min_pairing(c, unit, j);
    Cutoff ind(0.5 * params.delta[j - 1], params.delta[j - 1]);
    rho[j - 1] = ind(m);
  }
  double lead = 1.0;
  for (int J = 1; J <= n; ++J) {
    w.chi[J - 1] = lead * (1.0 - rho[J - 1]);
    lead *= rho[J - 1];
  }
  w.defect = lead;
  return w;
}

// ---------------------------------------------------------------------------

J3Decomposition::J3Decomposition(CurvePtr curve, SymbolFn base, int k,
                                 J3Options opt)
    : curve_(std::move(curve)), base_(std::move(base)), k_(k), opt_(opt) {
  if (k < 0) throw config_error("dyadic level must be nonnegative");
}

J3Eval J3Decomposition::eval(const Vec& xi, double s) const {
  J3Eval out;
  out.base = base_(xi, s);
  if (out.base == 0.0) return out;
  out.in_domain = true;
  out.theta = pairing_root(*curve_, xi, 2);
  out.u = curve_->derivative(out.theta, 1).dot(xi);
  out.L = k_ / 3;

  std::vector<double> A(out.L + 2, 1.0);
  for (int l = 1; l <= out.L + 1; ++l)
    A[l] = eta()(std::ldexp(out.u, -k_ + 2 * l));

  std::vector<double> lw(out.L + 1);
  if (out.L == 0) {
    lw[0] = 1.0;
  } else {
    lw[0] = 1.0 - A[1];
    for (int l = 1; l < out.L; ++l) lw[l] = A[l] - A[l + 1];
    lw[out.L] = A[out.L];
  }

  for (int l = 0; l <= out.L; ++l) {
    if (lw[l] == 0.0) continue;
    double y = std::ldexp(out.theta, l);
    for (const auto& [mu, zw] : zeta_weights(y)) {
      double v = out.base * lw[l] * zw;
      if (v == 0.0) continue;
      double s_mu = std::ldexp(static_cast<double>(mu), -l);
      double win = eta()(opt_.rho * std::exp2(l * (1.0 - opt_.eps)) * (s - s_mu));
      out.pieces.push_back({l, mu, v, win});
      out.sum += v;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

J4Decomposition::J4Decomposition(CurvePtr curve, SymbolFn base, int k,
                                 J4Options opt)
    : curve_(std::move(curve)), base_(std::move(base)), k_(k), opt_(opt) {
  if (k < 0) throw config_error("dyadic level must be nonnegative");
  if (curve_->dim() != 4)
    throw config_error("two-parameter decomposition requires dim 4");
}

J4Eval J4Decomposition::eval(const Vec& xi, double s) const {
  J4Eval out;
  out.base = base_(xi, s);
  if (out.base == 0.0) return out;
  out.in_domain = true;
  out.roots = cone_roots(*curve_, xi);
  const ConeRoots& r = out.roots;
  const int m = k_ / 4;
  out.m = m;
  const double inv_rho = 1.0 / opt_.rho;
  const double inv_rho4 = inv_rho * inv_rho * inv_rho * inv_rho;

  std::vector<double> A(m + 2), B(m + 1);
  A[0] = 1.0;
  for (int l = 1; l <= m + 1; ++l)
    A[l] = eta()(std::ldexp(r.u12, -k_ + 3 * l));
  B[0] = 1.0;
  for (int l = 1; l <= m; ++l)
    B[l] = eta()(inv_rho * std::ldexp(r.u2, -k_ + 2 * l));

  auto emit_a = [&](int family, int l, double weight) {
    if (weight == 0.0) return;
    double y = std::ldexp(r.theta2, l);
    for (const auto& [mu, zw] : zeta_weights(y)) {
      double v = out.base * weight * zw;
      if (v == 0.0) continue;
      double s_mu = std::ldexp(static_cast<double>(mu), -l);
      double win =
          eta()(opt_.rho * std::exp2(l * (1.0 - opt_.eps)) * (s - s_mu));
      out.pieces.push_back({family, l, l, mu, 0, v, win});
      out.sum += v;
    }
  };

  for (int l = 0; l <= m; ++l) emit_a(1, l, (A[l] - A[l + 1]) * B[l]);
  emit_a(2, m, A[m + 1] * B[m]);

  for (int l2 = 0; l2 < m; ++l2) {
    double mixed = A[l2 + 1] * (B[l2] - B[l2 + 1]);
    if (mixed == 0.0) continue;
    if (r.u2 >= 0.0) {
      emit_a(2, l2, mixed);
      continue;
    }
    // u2 < 0 branch: refine in the first-derivative pairing at theta1
    if (!r.has_theta1)
      throw degeneracy_error("negative-u2 weight without theta1 data");
    int L2 = l1_cap(k_, l2);
    std::vector<double> G(L2 + 1);
    for (int l1 = l2; l1 <= L2; ++l1)
      G[l1] = eta()(inv_rho4 * std::ldexp(r.u1, -k_ + 3 * l1));
    double W = eta()(inv_rho * std::ldexp(s - r.theta1, l2));

    emit_a(3, l2, mixed * (1.0 - G[l2]));
    emit_a(4, l2, mixed * G[l2] * (1.0 - W));

    for (int l1 = l2; l1 <= L2; ++l1) {
      double gw = (l1 < L2) ? (G[l1] - G[l1 + 1]) : G[L2];
      double w5 = mixed * gw * W;
      if (w5 == 0.0) continue;
      double q = 0.5 * (3.0 * l1 - l2);
      double y = std::exp2(q) * r.theta1;
      double qq = 1.5 * (l1 - l2);
      for (const auto& [nu, zw] : zeta_weights(y)) {
        double v = out.base * w5 * zw;
        if (v == 0.0) continue;
        long mu = static_cast<long>(
            std::floor(std::exp2(-qq) * static_cast<double>(nu) + 0.5));
        double s_nu = static_cast<double>(nu) * std::exp2(-q);
        double win =
            eta()(opt_.rho * std::exp2((1.0 - opt_.eps) * q) * (s - s_nu));
        out.pieces.push_back({5, l1, l2, mu, nu, v, win});
        out.sum += v;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

SymbolFn make_cone_window_base(int n, int dominant_axis, int k,
                               double plateau_ratio, double support_ratio,
                               Cutoff chi) {
  Cutoff window(plateau_ratio, support_ratio);
  return [n, dominant_axis, k, window, chi](const Vec& xi, double s) -> double {
    double big = xi[dominant_axis - 1];
    if (!(big > 0.0)) return 0.0;
    double v = chi(s);
    if (v == 0.0) return 0.0;
    v *= dyadic_band(xi.norm(), k);
    if (v == 0.0) return 0.0;
    for (int j = 1; j <= n; ++j) {
      if (j == dominant_axis) continue;
      v *= window(xi[j - 1] / big);
      if (v == 0.0) return 0.0;
    }
    return v;
  };
}

Vec sample_shell_xi(int n, int dominant_axis, int k, double ratio_window,
                    Rng& rng) {
  double radius = std::ldexp(rng.uniform(0.75, 1.5), k);
  Vec xi(n);
  for (int j = 1; j <= n; ++j) {
    if (j == dominant_axis)
      xi[j - 1] = 1.0;
    else
      xi[j - 1] = rng.uniform(-ratio_window, ratio_window);
  }
  xi *= radius / xi.norm();
  if (xi[dominant_axis - 1] < 0.0) xi = -xi;
  return xi;
}

namespace {

// Shift xi along e1 so the first-derivative pairing at the relevant root
// lands on `target`.  Exact for the moment curve (the root and the shift
// decouple); approximate otherwise, in which case rejection retries.
void place_u1(Vec& xi, double current, double target) {
  xi[0] += target - current;
}

}  // namespace

DecompositionAudit j3_audit(const J3Decomposition& dec, int points,
                            std::uint64_t seed) {
  DecompositionAudit audit;
  Rng rng(seed, 31);
  const Curve& c = dec.curve();
  int n = c.dim();
  const int k = dec.k();
  const int L = k / 3;
  int attempts_left = 400 * points;
  while (audit.points < points && attempts_left-- > 0) {
    Vec xi = sample_shell_xi(n, 3, k, dec.options().sampler_spread, rng);
    double s = rng.uniform(-0.5, 0.5);
    if (rng.uniform() < 0.5 && L > 0) {
      // steer the draw onto a chosen rung of the u-ladder
      int l = static_cast<int>(rng.uniform(0.0, L + 1.0));
      double w = (l == 0) ? rng.uniform(1.0, 1.04) : rng.uniform(0.3, 1.9);
      double sign = (rng.uniform() < 0.5) ? -1.0 : 1.0;
      double target = sign * w * std::ldexp(1.0, k - 2 * std::min(l, L));
      try {
        double theta = pairing_root(c, xi, 2);
        place_u1(xi, c.derivative(theta, 1).dot(xi), target);
      } catch (const std::exception&) {
        continue;
      }
    }
    if (dec.base_value(xi, s) == 0.0) continue;
    J3Eval ev = dec.eval(xi, s);
    ++audit.points;
    audit.max_reconstruction_error = std::max(
        audit.max_reconstruction_error, std::abs(ev.sum - ev.base));
    Vec unit = xi / std::ldexp(1.0, k);
    std::vector<std::pair<int, int>> level_counts;
    for (const auto& p : ev.pieces) {
      ++audit.pieces;
      ++audit.family_pieces[1];
      double s_mu = std::ldexp(static_cast<double>(p.mu), -p.l);
      double C = box_constant_needed(c, s_mu, std::ldexp(1.0, -p.l), 2, unit);
      audit.max_box_constant = std::max(audit.max_box_constant, C);
      bool found = false;
      for (auto& lc : level_counts)
        if (lc.first == p.l) {
          ++lc.second;
          found = true;
        }
      if (!found) level_counts.emplace_back(p.l, 1);
    }
    for (const auto& lc : level_counts)
      audit.max_angular_terms = std::max(audit.max_angular_terms, lc.second);
  }
  if (audit.points < points)
    throw convergence_error("support sampler starved by rejection");
  return audit;
}

int pinning_gap(double rho) {
  if (!(rho > 0.0) || rho > 1.0)
    throw config_error("window ratio rho must lie in (0, 1]");
  int gap = 0;
  while (std::exp2(-1.5 * gap) > std::sqrt(rho)) ++gap;
  return gap;
}

DecompositionAudit j4_audit(const J4Decomposition& dec, int points,
                            std::uint64_t seed) {
  DecompositionAudit audit;
  Rng rng(seed, 41);
  const Curve& c = dec.curve();
  const int k = dec.k();
  const int m = J4Decomposition::l2_cap(k);
  const double rho = dec.options().rho;
  int attempts_left = 400 * points;
  while (audit.points < points && attempts_left-- > 0) {
    Vec xi = sample_shell_xi(4, 4, k, dec.options().sampler_spread, rng);
    double s = rng.uniform(-0.5, 0.5);
    int mode = static_cast<int>(rng.uniform(0.0, 5.0));
    if (mode > 0 && m > 0) {
      try {
        ConeRoots r0 = cone_roots(c, xi);
        if (mode == 1) {
          // family-1 rung: u12 in band l, u2 inside the level-l plateau
          int l = static_cast<int>(rng.uniform(0.0, m + 1.0));
          double w = (l == 0) ? rng.uniform(0.13, 0.18) * std::exp2(3 * l)
                              : rng.uniform(0.3, 1.9);
          double sgn = (rng.uniform() < 0.5) ? -1.0 : 1.0;
          double v = rng.uniform(0.1, 0.9) * rho * std::ldexp(1.0, k - 2 * l);
          double sgn2 = (rng.uniform() < 0.5) ? -1.0 : 1.0;
          xi[1] += sgn2 * v - r0.u2;
          ConeRoots r1 = cone_roots(c, xi);
          place_u1(xi, r1.u12, sgn * w * std::ldexp(1.0, k - 3 * l));
        } else if (mode == 2) {
          // terminal corner: u12 below the last A-scale, u2 inside B_m
          double v = rng.uniform(0.05, 0.9) * rho * std::ldexp(1.0, k - 2 * m);
          double sgn2 = (rng.uniform() < 0.5) ? -1.0 : 1.0;
          xi[1] += sgn2 * v - r0.u2;
          ConeRoots r1 = cone_roots(c, xi);
          double t = rng.uniform(-1.9, 1.9);
          place_u1(xi, r1.u12, t * std::ldexp(1.0, k - 3 * m - 3));
        } else {
          // mixed rungs: u2 in the B-band at l2; sign picks the branch
          int l2 = static_cast<int>(rng.uniform(0.0, static_cast<double>(m)));
          double v = rng.uniform(0.3, 1.9) * rho * std::ldexp(1.0, k - 2 * l2);
          double sgn2 = (mode == 3 && rng.uniform() < 0.5) ? 1.0 : -1.0;
          xi[1] += sgn2 * v - r0.u2;
          ConeRoots r1 = cone_roots(c, xi);
          if (mode == 3) {
            place_u1(xi, r1.u12,
                     rng.uniform(-1.9, 1.9) * std::ldexp(1.0, k - 3 * l2 - 3));
          } else if (r1.has_theta1) {
            // family 4/5: u1 within the G-window at l1, s near theta1
            int l1 = l2 + static_cast<int>(rng.uniform(
                              0.0, J4Decomposition::l1_cap(k, l2) - l2 + 1.0));
            double t = rng.uniform(-1.8, 1.8);
            double r4 = rho * rho * rho * rho;
            place_u1(xi, r1.u1, t * r4 * std::ldexp(1.0, k - 3 * l1));
            if (rng.uniform() < 0.7) {
              double js = rng.uniform(-1.8, 1.8) * rho * std::exp2(-l2);
              s = std::clamp(r1.theta1 + js, -0.5, 0.5);
            }
          } else {
            continue;
          }
        }
      } catch (const std::exception&) {
        continue;
      }
    }
    if (dec.base_value(xi, s) == 0.0) continue;
    J4Eval ev;
    try {
      ev = dec.eval(xi, s);
    } catch (const domain_error&) {
      continue;
    } catch (const convergence_error&) {
      continue;
    }
    ++audit.points;
    audit.max_reconstruction_error = std::max(
        audit.max_reconstruction_error, std::abs(ev.sum - ev.base));
    Vec unit = xi / std::ldexp(1.0, k);
    std::vector<std::pair<int, int>> level_counts;
    for (const auto& p : ev.pieces) {
      ++audit.pieces;
      ++audit.family_pieces[p.family];
      if (p.family < 5) {
        double s_mu = std::ldexp(static_cast<double>(p.mu), -p.l2);
        double C =
            box_constant_needed(c, s_mu, std::ldexp(1.0, -p.l2), 3, unit);
        audit.max_box_constant = std::max(audit.max_box_constant, C);
        bool found = false;
        for (auto& lc : level_counts)
          if (lc.first == p.l2) {
            ++lc.second;
            found = true;
          }
        if (!found) level_counts.emplace_back(p.l2, 1);
      } else {
        double q = 0.5 * (3.0 * p.l1 - p.l2);
        double s_nu = static_cast<double>(p.nu) * std::exp2(-q);
        Vec unit_b = xi / std::ldexp(1.0, k - p.l2);
        double Cb = box_constant_needed_two_scale(
            c, s_nu, std::exp2(-q), std::ldexp(1.0, p.l2), 2, unit_b);
        int gap = std::min(p.l1 - p.l2, DecompositionAudit::kMaxGap - 1);
        ++audit.b_pieces_by_gap[gap];
        audit.box_constant_b_by_gap[gap] =
            std::max(audit.box_constant_b_by_gap[gap], Cb);

        // grouped piece: single-scale box at the group center
        double s_mu = std::ldexp(static_cast<double>(p.mu), -p.l2);
        double Cg =
            box_constant_needed(c, s_mu, std::ldexp(1.0, -p.l2), 3, unit);
        audit.max_box_constant = std::max(audit.max_box_constant, Cg);

        // rescaled variant: pure coordinate change about the group center
        double lam = std::ldexp(1.0, -p.l2);
        Mat T = gamma_matrix_scaled(c, s_mu, lam);
        Vec xi_t = T.transpose() * xi;
        RescaledCurve resc(dec.curve_ptr(), s_mu, lam);
        double s_nu_t = (s_nu - s_mu) / lam;
        double r_t = std::exp2(-1.5 * (p.l1 - p.l2));
        Vec unit_t = xi_t / std::ldexp(1.0, k - 4 * p.l2);
        double Cr = box_constant_needed(resc, s_nu_t, r_t, 2, unit_t);
        audit.box_constant_b_rescaled_by_gap[gap] =
            std::max(audit.box_constant_b_rescaled_by_gap[gap], Cr);
        double sep = std::abs(ev.roots.theta1_plus - ev.roots.theta1_minus);
        bool resolved = p.l1 - p.l2 >= pinning_gap(rho) &&
                        std::abs(s_nu - ev.roots.theta1) <= 0.5 * sep;
        if (resolved) {
          ++audit.b_pieces_resolved;
          audit.max_box_constant_b = std::max(audit.max_box_constant_b, Cb);
          audit.max_box_constant_b_rescaled =
              std::max(audit.max_box_constant_b_rescaled, Cr);
        } else {
          ++audit.b_pieces_straddling;
          audit.max_box_constant_b_straddling =
              std::max(audit.max_box_constant_b_straddling, std::max(Cb, Cr));
        }

        double third = std::abs(c.derivative(s, 3).dot(xi));
        double ratio3 =
            third / (std::sqrt(rho) * std::ldexp(1.0, k - p.l2));
        audit.b_third_ratio_min = std::min(audit.b_third_ratio_min, ratio3);
        audit.b_third_ratio_max = std::max(audit.b_third_ratio_max, ratio3);
        double branch_gap = std::abs(ev.roots.u1_plus - ev.roots.u1_minus);
        audit.b_u1gap_min = std::min(
            audit.b_u1gap_min,
            branch_gap / (std::pow(rho, 1.5) * std::ldexp(1.0, k - 3 * p.l2)));
      }
    }
    for (const auto& lc : level_counts)
      audit.max_angular_terms = std::max(audit.max_angular_terms, lc.second);
  }
  if (audit.points < points)
    throw convergence_error("support sampler starved by rejection");
  return audit;
}

}  // namespace curvelab
