#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gpe/constants.hpp"
#include "gpe/functionals.hpp"
#include "gpe/params.hpp"

namespace gpe {

// ---------------------------------------------------------------------------
// The comparison function
//   h(t) = 1/2 t^2 - D1 t^{gamma_p} - D2 t^{gamma_q} - c3 t^{gamma_r},
// a lower bound for the energy at gradient norm t. In the critical regime
// c3 = nu S^{-2*/2} (gamma_r = 2*); in the subcritical regime c3 = nu D3.
// ---------------------------------------------------------------------------
struct HFunction {
  double D1 = 0.0, D2 = 0.0, c3 = 0.0;
  double gp = 0.0, gq = 0.0, gr = 0.0;

  double value(double t) const {
    return 0.5 * t * t - D1 * std::pow(t, gp) - D2 * std::pow(t, gq) -
           c3 * std::pow(t, gr);
  }
  double deriv(double t) const {
    return t - D1 * gp * std::pow(t, gp - 1) - D2 * gq * std::pow(t, gq - 1) -
           c3 * gr * std::pow(t, gr - 1);
  }
};

struct HCritPoint {
  double t = 0.0;
  double h = 0.0;
  int curvature = 0;  // +1 local min, -1 local max
};

struct GeometryReport {
  Regime regime = Regime::subcritical;
  double D1 = 0.0, D2 = 0.0;
  std::optional<double> D3;         // subcritical only
  std::optional<double> T_ab;       // critical threshold parameter
  std::optional<double> T_tilde_ab; // subcritical threshold parameter
  std::optional<double> alpha1;
  std::optional<double> c0;         // subcritical gate level on T_tilde
  std::string c0_provenance;
  bool feasible = false;
  std::vector<HCritPoint> h_crit_points;
  std::optional<double> R0, R1, R, k0;
  std::optional<double> tbar, sbar;
  std::optional<double> R1_bound;   // critical: (S^{2*/2}/(2 nu))^{1/(2*-2)}
};

namespace detail {

inline HFunction h_function(const ProblemParams& pp, ConstantsTable& tab,
                            double mass_scale = 1.0) {
  HFunction h;
  h.gp = pp.gamma_p();
  h.gq = pp.gamma_q();
  const double a = mass_scale * pp.a;
  const double b = mass_scale * pp.b;
  h.D1 = pp.mu1 / pp.p * tab.gn(pp.N, pp.p) *
         std::pow(a, 0.5 * (pp.p - pp.gamma_p()));
  h.D2 = pp.mu2 / pp.q * tab.gn(pp.N, pp.q) *
         std::pow(b, 0.5 * (pp.q - pp.gamma_q()));
  if (pp.is_critical()) {
    const double ts = pp.two_star();
    h.gr = ts;
    h.c3 = pp.nu * std::pow(tab.sobolev(pp.N), -0.5 * ts);
  } else {
    h.gr = pp.gamma_r();
    const double r = pp.r();
    const double D3 = std::pow(std::max(pp.alpha, pp.beta) / r, 0.5 * h.gr) *
                      tab.gn(pp.N, r) *
                      std::pow(a, pp.alpha * (r - h.gr) / (2.0 * r)) *
                      std::pow(b, pp.beta * (r - h.gr) / (2.0 * r));
    h.c3 = pp.nu * D3;
  }
  return h;
}

/// All critical points of h on (0, inf): log scan plus bisection of the sign
/// changes of h'. The fiber-polynomial structure admits at most two.
inline std::vector<HCritPoint> h_critical_points(const HFunction& h,
                                                 int scan_points = 4000) {
  // characteristic scale of the upper critical point
  double t_high = 1.0;
  {
    auto high_deriv = [&](double t) {
      double s = h.D2 * h.gq * std::pow(t, h.gq - 2);
      if (h.gr > 2.0) s += h.c3 * h.gr * std::pow(t, h.gr - 2);
      return s - 1.0;
    };
    if (h.D2 > 0.0 || (h.gr > 2.0 && h.c3 > 0.0)) {
      double hi = 1.0;
      while (high_deriv(hi) < 0.0 && hi < 1e200) hi *= 4.0;
      double lo = hi;
      while (high_deriv(lo) > 0.0 && lo > 1e-200) lo *= 0.25;
      t_high = bisect_log(high_deriv, lo, hi);
    }
  }
  double t_lo_scale = t_high;
  if (h.D1 > 0.0)
    t_lo_scale = std::min(t_lo_scale,
                          std::pow(h.gp * h.D1, 1.0 / (2.0 - h.gp)));
  if (h.gr < 2.0 && h.c3 > 0.0)
    t_lo_scale = std::min(t_lo_scale,
                          std::pow(h.gr * h.c3, 1.0 / (2.0 - h.gr)));
  const double t_lo = 1e-7 * t_lo_scale;
  const double t_hi = 50.0 * t_high;

  std::vector<HCritPoint> pts;
  double prev_t = t_lo, prev_d = h.deriv(prev_t);
  for (int k = 1; k < scan_points; ++k) {
    const double t =
        t_lo * std::pow(t_hi / t_lo, static_cast<double>(k) / (scan_points - 1));
    const double d = h.deriv(t);
    if ((prev_d > 0) != (d > 0)) {
      const double root = bisect([&](double x) { return h.deriv(x); }, prev_t,
                                 t, 1e-15, 300);
      HCritPoint cp;
      cp.t = root;
      cp.h = h.value(root);
      cp.curvature = prev_d < 0 ? +1 : -1;
      pts.push_back(cp);
    }
    prev_t = t;
    prev_d = d;
  }
  if (pts.size() > 2)
    throw StructuralError("h has " + std::to_string(pts.size()) +
                          " critical points; the structure admits at most 2");
  return pts;
}

/// Positive part of the geometry: roots R0 < R1 of h bracketing the barrier,
/// R = (R0+R1)/2 and k0 = h(R). Returns false when h never becomes positive.
inline bool h_roots(const HFunction& h, const std::vector<HCritPoint>& pts,
                    double& R0, double& R1, double& R, double& k0) {
  const HCritPoint* top = nullptr;
  for (const auto& p : pts)
    if (p.curvature < 0 && (!top || p.h > top->h)) top = &p;
  if (!top || top->h <= 0.0) return false;

  // left root: below the maximum h is negative (low powers dominate) unless
  // there is no low-power term at all, in which case h > 0 from 0+.
  const bool has_low = h.D1 > 0.0 || (h.gr < 2.0 && h.c3 > 0.0);
  if (!has_low) {
    R0 = 0.0;
  } else {
    double lo = top->t;
    while (h.value(lo) > 0.0) lo *= 0.5;
    R0 = bisect([&](double t) { return h.value(t); }, lo, top->t, 1e-14, 300);
  }
  double hi = top->t;
  while (h.value(hi) > 0.0) hi *= 2.0;
  R1 = bisect([&](double t) { return h.value(t); }, top->t, hi, 1e-14, 300);
  R = 0.5 * (R0 + R1);
  k0 = h.value(R);
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Threshold parameters
// ---------------------------------------------------------------------------

/// Critical-regime threshold T_{a,b}. Requires N >= 3.
inline double threshold_T(const ProblemParams& pp) {
  const double gp = pp.gamma_p(), gq = pp.gamma_q(), ts = pp.two_star();
  const double X = pp.mu1 * std::pow(pp.a, 0.5 * (pp.p - gp));
  return pp.mu2 * std::pow(pp.b, 0.5 * (pp.q - gq)) *
             std::pow(X, (gq - 2.0) / (2.0 - gp)) +
         pp.nu * std::pow(X, (ts - 2.0) / (2.0 - gp));
}

/// Subcritical threshold T~_{a,b}; branches on r against the mass-critical
/// exponent.
inline double threshold_T_tilde(const ProblemParams& pp) {
  const double gp = pp.gamma_p(), gq = pp.gamma_q(), gr = pp.gamma_r();
  const double r = pp.r();
  const double pbar = pp.mass_critical();
  const double mu1a = pp.mu1 * std::pow(pp.a, pp.p - gp);
  const double mu2b = pp.mu2 * std::pow(pp.b, pp.q - gq);
  const double ab_part = std::pow(pp.a, pp.alpha * (1.0 - gr / r)) *
                         std::pow(pp.b, pp.beta * (1.0 - gr / r));
  if (r < pbar - 1e-12) {
    return ab_part * pp.nu * std::pow(mu2b, (2.0 - gr) / (gq - 2.0)) +
           mu1a * std::pow(mu2b, (2.0 - gp) / (gq - 2.0));
  }
  if (r > pbar + 1e-12) {
    return ab_part * pp.nu * std::pow(mu1a, (gr - 2.0) / (2.0 - gp)) +
           mu2b * std::pow(mu1a, (gq - 2.0) / (2.0 - gp));
  }
  return std::min(ab_part * pp.nu,
                  std::pow(mu1a, 1.0 / (2.0 - gp)) *
                      std::pow(mu2b, 1.0 / (gq - 2.0)));
}

// ---------------------------------------------------------------------------
// Full geometry analysis. The feasibility gate is
//   critical:    T_{a,b} < alpha1,
//   subcritical: T~_{a,b} < c0,
// where alpha1 uses the larger of the two extracted coefficients so that the
// gate is sufficient for the two-critical-point structure, and c0 defaults
// to the value of T~ at the mass scale where the barrier degenerates
// (calibrated along the ray through (a, b); reported as a surrogate).
// ---------------------------------------------------------------------------
inline GeometryReport analyze_geometry(
    const ProblemParams& pp, ConstantsTable& tab,
    std::optional<double> c0_override = std::nullopt) {
  pp.validate();
  GeometryReport rep;
  rep.regime = pp.regime();
  const double gp = pp.gamma_p(), gq = pp.gamma_q();

  HFunction h = detail::h_function(pp, tab);
  rep.D1 = h.D1;
  rep.D2 = h.D2;
  if (!pp.is_critical())
    rep.D3 = h.c3 / (pp.nu > 0 ? pp.nu : 1.0);

  rep.h_crit_points = detail::h_critical_points(h);
  double R0, R1, R, k0;
  if (detail::h_roots(h, rep.h_crit_points, R0, R1, R, k0)) {
    rep.R0 = R0;
    rep.R1 = R1;
    rep.R = R;
    rep.k0 = k0;
  }

  // s-bar / t-bar diagnostics of the threshold derivation
  if (h.D1 > 0.0)
    rep.sbar = std::pow(2.0 * h.D1 * (gq - gp) / (gq - 2.0), 1.0 / (2.0 - gp));
  {
    auto rhs = [&](double t) {
      double s = h.D2 * gq * (gq - gp) * std::pow(t, gq - 2.0);
      if (h.gr > 2.0) s += h.c3 * h.gr * (h.gr - gp) * std::pow(t, h.gr - 2.0);
      return s - (2.0 - gp);
    };
    if (h.D2 > 0.0 || (h.gr > 2.0 && h.c3 > 0.0)) {
      double hi = 1.0;
      while (rhs(hi) < 0.0 && hi < 1e200) hi *= 4.0;
      double lo = hi;
      while (rhs(lo) > 0.0 && lo > 1e-200) lo *= 0.25;
      rep.tbar = bisect_log(rhs, lo, hi);
    }
  }

  // alpha1 from the derivation coefficients (sufficient form)
  {
    const double Cp = tab.gn(pp.N, pp.p);
    const double B = 2.0 * Cp * (gq - gp) / (pp.p * (gq - 2.0));
    const double K1 = tab.gn(pp.N, pp.q) * gq * (gq - gp) / pp.q *
                      std::pow(B, (gq - 2.0) / (2.0 - gp));
    if (pp.is_critical()) {
      const double ts = pp.two_star();
      const double K2 = ts * std::pow(tab.sobolev(pp.N), -0.5 * ts) *
                        (ts - gp) * std::pow(B, (ts - 2.0) / (2.0 - gp));
      rep.alpha1 = (2.0 - gp) / std::max(K1, K2);
    } else if (h.gr > 2.0) {
      const double r = pp.r();
      const double K2 = h.gr * (h.gr - gp) *
                        std::pow(std::max(pp.alpha, pp.beta) / r, 0.5 * h.gr) *
                        tab.gn(pp.N, r) *
                        std::pow(B, (h.gr - 2.0) / (2.0 - gp));
      rep.alpha1 = (2.0 - gp) / std::max(K1, K2);
    }
  }

  if (pp.is_critical()) {
    rep.T_ab = threshold_T(pp);
    const double ts = pp.two_star();
    rep.R1_bound = std::pow(std::pow(tab.sobolev(pp.N), 0.5 * ts) /
                                (2.0 * pp.nu),
                            1.0 / (ts - 2.0));
    rep.feasible = *rep.T_ab < *rep.alpha1;
  } else {
    rep.T_tilde_ab = threshold_T_tilde(pp);
    if (c0_override) {
      rep.c0 = *c0_override;
      rep.c0_provenance = "configured";
    } else {
      // calibrate along the mass ray: the largest scale sigma at which the
      // barrier maximum stays positive
      auto barrier_max = [&](double sigma) {
        HFunction hs = detail::h_function(pp, tab, sigma);
        auto pts = detail::h_critical_points(hs);
        double best = -1e300;
        for (const auto& p : pts)
          if (p.curvature < 0) best = std::max(best, p.h);
        return best;
      };
      double lo = 1.0, hi = 1.0;
      while (barrier_max(lo) <= 0.0 && lo > 1e-12) lo *= 0.5;
      while (barrier_max(hi) > 0.0 && hi < 1e12) hi *= 2.0;
      if (lo <= 1e-12) {
        rep.c0 = 0.0;
      } else {
        const double sigma_star =
            bisect_log([&](double s) { return barrier_max(s); }, lo, hi, 1e-12);
        ProblemParams scaled = pp;
        scaled.a = sigma_star * pp.a;
        scaled.b = sigma_star * pp.b;
        rep.c0 = threshold_T_tilde(scaled);
      }
      rep.c0_provenance = "mass-ray surrogate";
    }
    rep.feasible = *rep.T_tilde_ab < *rep.c0;
  }
  return rep;
}

/// Largest mass a keeping the critical gate satisfied at fixed b, nu
/// (existence of the admissible mass range).
inline double feasible_mass_limit(const ProblemParams& pp, ConstantsTable& tab) {
  auto gap = [&](double a) {
    ProblemParams q = pp;
    q.a = a;
    GeometryReport rep = analyze_geometry(q, tab);
    if (q.is_critical()) return *rep.T_ab - *rep.alpha1;
    return *rep.T_tilde_ab - *rep.c0;
  };
  double lo = pp.a, hi = pp.a;
  while (gap(lo) >= 0.0 && lo > 1e-14) lo *= 0.5;
  if (lo <= 1e-14) return 0.0;
  while (gap(hi) < 0.0 && hi < 1e14) hi *= 2.0;
  return bisect_log(gap, lo, hi, 1e-10);
}

// ---------------------------------------------------------------------------
// Monte-Carlo surrogate for the emptiness of the degenerate Pohozaev slice:
// samples random pairs in the mass balls, moves to their fiber critical
// points and reports the worst normalized |Phi''| margin there.
// ---------------------------------------------------------------------------
struct P0ScanResult {
  bool empty = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  int samples = 0;
};

inline P0ScanResult p0_empty_scan(const ProblemParams& pp, const GridPtr& grid,
                                  int n_samples, std::uint64_t seed,
                                  double margin_tol = 1e-6) {
  P0ScanResult out;
  Rng rng(seed);
  for (int k = 0; k < n_samples; ++k) {
    const double ma = pp.a * rng.uniform(0.05, 1.0);
    const double mb = pp.b * rng.uniform(0.05, 1.0);
    FieldPair pair{scaled_to_mass(random_bump_field(grid, rng), ma),
                   scaled_to_mass(random_bump_field(grid, rng), mb)};
    auto n = pair_norms(pair, pp);
    auto fa = classify(n, pp);
    for (const auto& tc : {fa.s_crit, fa.t_crit}) {
      if (!tc) continue;
      const double d2 = fiber(n, pp, *tc).d2phi;
      out.worst_margin = std::min(out.worst_margin, std::abs(d2) / n.K);
    }
    ++out.samples;
  }
  out.empty = out.worst_margin > margin_tol;
  return out;
}

}  // namespace gpe
