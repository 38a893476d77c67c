#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gpe/params.hpp"
#include "gpe/radial.hpp"

namespace gpe {

// ---------------------------------------------------------------------------
// Cached norm tuple of a pair. Fiber evaluation is then a 4-term scalar
// formula; path searches call it thousands of times per pair.
// ---------------------------------------------------------------------------
struct PairNorms {
  double K = 0.0;      // ||grad u||^2 + ||grad v||^2
  double up = 0.0;     // ||u||_p^p
  double vq = 0.0;     // ||v||_q^q
  double cross = 0.0;  // int |u|^alpha |v|^beta
  double mass_u = 0.0;
  double mass_v = 0.0;
};

inline double coupling_integral(const FieldPair& pair,
                                const ProblemParams& pp) {
  check_same_grid(pair.u, pair.v);
  const auto& g = *pair.u.grid;
  double acc = 0.0;
  for (int i = 0; i < g.M; ++i) {
    const double uu = std::abs(pair.u.v[i]);
    const double vv = std::abs(pair.v.v[i]);
    if (uu > 0.0 && vv > 0.0)
      acc += g.w[i] * std::pow(uu, pp.alpha) * std::pow(vv, pp.beta);
  }
  return acc;
}

inline PairNorms pair_norms(const FieldPair& pair, const ProblemParams& pp) {
  PairNorms n;
  n.K = grad_norm_sq(pair.u) + grad_norm_sq(pair.v);
  n.up = lp_norm_pow(pair.u, pp.p);
  n.vq = lp_norm_pow(pair.v, pp.q);
  n.cross = coupling_integral(pair, pp);
  n.mass_u = mass(pair.u);
  n.mass_v = mass(pair.v);
  return n;
}

// ---------------------------------------------------------------------------
// Energy and Pohozaev functionals
// ---------------------------------------------------------------------------

inline double energy(const PairNorms& n, const ProblemParams& pp) {
  const double e = 0.5 * n.K - pp.mu1 / pp.p * n.up - pp.mu2 / pp.q * n.vq -
                   pp.nu * n.cross;
  if (!std::isfinite(e)) throw SolverError("energy: non-finite value");
  return e;
}

inline double energy(const FieldPair& pair, const ProblemParams& pp) {
  return energy(pair_norms(pair, pp), pp);
}

inline double pohozaev(const PairNorms& n, const ProblemParams& pp) {
  const double v = n.K - pp.mu1 / pp.p * pp.gamma_p() * n.up -
                   pp.mu2 / pp.q * pp.gamma_q() * n.vq -
                   pp.gamma_r() * pp.nu * n.cross;
  if (!std::isfinite(v)) throw SolverError("pohozaev: non-finite value");
  return v;
}

inline double pohozaev(const FieldPair& pair, const ProblemParams& pp) {
  return pohozaev(pair_norms(pair, pp), pp);
}

// ---------------------------------------------------------------------------
// Fiber map Phi(t) = I(t * (u,v)) and its first two t-derivatives,
// closed-form in the cached norms. t * Phi'(t) equals P(t * (u,v)).
// ---------------------------------------------------------------------------
struct FiberValue {
  double phi;
  double dphi;
  double d2phi;
};

inline FiberValue fiber(const PairNorms& n, const ProblemParams& pp,
                        double t) {
  if (!(t > 0.0)) throw ConfigError("fiber: t must be positive");
  const double gp = pp.gamma_p(), gq = pp.gamma_q(), gr = pp.gamma_r();
  const double cp = pp.mu1 / pp.p * n.up;
  const double cq = pp.mu2 / pp.q * n.vq;
  const double cr = pp.nu * n.cross;
  FiberValue f;
  f.phi = 0.5 * n.K * t * t - cp * std::pow(t, gp) - cq * std::pow(t, gq) -
          cr * std::pow(t, gr);
  f.dphi = n.K * t - cp * gp * std::pow(t, gp - 1) -
           cq * gq * std::pow(t, gq - 1) - cr * gr * std::pow(t, gr - 1);
  f.d2phi = n.K - cp * gp * (gp - 1) * std::pow(t, gp - 2) -
            cq * gq * (gq - 1) * std::pow(t, gq - 2) -
            cr * gr * (gr - 1) * std::pow(t, gr - 2);
  return f;
}

enum class FiberClass { P_plus, P_zero, P_minus, off_manifold };

inline const char* fiber_class_name(FiberClass c) {
  switch (c) {
    case FiberClass::P_plus: return "P_plus";
    case FiberClass::P_zero: return "P_zero";
    case FiberClass::P_minus: return "P_minus";
    default: return "off_manifold";
  }
}

struct FiberAnalysis {
  std::optional<double> s_crit;  // first critical point (Phi'' > 0)
  std::optional<double> t_crit;  // second critical point (Phi'' < 0)
  double phi_at_s = 0.0;
  double phi_at_t = 0.0;
  double d2_at_s = 0.0;
  double d2_at_t = 0.0;
  FiberClass classification = FiberClass::off_manifold;
  double dphi_at_one = 0.0;
  double scale = 0.0;  // membership test scale (= K)
};

/// Brackets and bisects all sign changes of Phi' on a log-spaced scan of
/// [1e-6, 1e6]. More than two critical points contradicts the structure of
/// the fiber polynomial and raises StructuralError.
inline FiberAnalysis classify(const PairNorms& n, const ProblemParams& pp,
                              double tol = 1e-6, int scan_points = 2000) {
  if (n.K <= 0.0) throw ConfigError("classify: pair must be nonzero");
  FiberAnalysis out;
  out.scale = n.K;

  const double t_lo = 1e-6, t_hi = 1e6;
  std::vector<double> roots;
  double prev_t = t_lo;
  double prev_d = fiber(n, pp, prev_t).dphi;
  for (int k = 1; k < scan_points; ++k) {
    const double t =
        t_lo * std::pow(t_hi / t_lo, static_cast<double>(k) / (scan_points - 1));
    const double d = fiber(n, pp, t).dphi;
    if (prev_d == 0.0) roots.push_back(prev_t);
    else if ((prev_d > 0) != (d > 0)) {
      const double root = bisect(
          [&](double x) { return fiber(n, pp, x).dphi; }, prev_t, t, 1e-15);
      roots.push_back(root);
    }
    prev_t = t;
    prev_d = d;
  }
  if (roots.size() > 2) {
    std::string msg = "classify: fiber map has " +
                      std::to_string(roots.size()) +
                      " critical points (structure admits at most two); t =";
    for (double r : roots) msg += " " + format_g17(r);
    throw StructuralError(msg);
  }
  for (double r : roots) {
    const auto f = fiber(n, pp, r);
    if (f.d2phi > 0.0) {
      out.s_crit = r;
      out.phi_at_s = f.phi;
      out.d2_at_s = f.d2phi;
    } else {
      out.t_crit = r;
      out.phi_at_t = f.phi;
      out.d2_at_t = f.d2phi;
    }
  }
  if (out.s_crit && out.t_crit && !(*out.s_crit < *out.t_crit))
    throw StructuralError("classify: critical points out of order");

  const auto f1 = fiber(n, pp, 1.0);
  out.dphi_at_one = f1.dphi;
  if (std::abs(f1.dphi) <= tol * out.scale) {
    if (f1.d2phi > tol * out.scale) out.classification = FiberClass::P_plus;
    else if (f1.d2phi < -tol * out.scale)
      out.classification = FiberClass::P_minus;
    else out.classification = FiberClass::P_zero;
  } else {
    out.classification = FiberClass::off_manifold;
  }
  return out;
}

inline FiberAnalysis classify(const FieldPair& pair, const ProblemParams& pp,
                              double tol = 1e-6) {
  return classify(pair_norms(pair, pp), pp, tol);
}

// ---------------------------------------------------------------------------
// L^2 gradient of I: the Euler-Lagrange residual without multipliers.
//   G_u = -Lap u - mu1 |u|^{p-2}u - nu alpha |u|^{alpha-2}u |v|^beta
//   G_v = -Lap v - mu2 |v|^{q-2}v - nu beta  |u|^alpha |v|^{beta-2}v
// Fields are maintained nonnegative by the solvers, so the power laws are
// evaluated on the positive parts.
// ---------------------------------------------------------------------------
inline void el_gradient(const FieldPair& pair, const ProblemParams& pp,
                        std::vector<double>& gu, std::vector<double>& gv) {
  const auto& g = *pair.u.grid;
  gu = neg_laplacian(pair.u);
  gv = neg_laplacian(pair.v);
  for (int i = 0; i < g.M; ++i) {
    const double u = std::max(pair.u.v[i], 0.0);
    const double v = std::max(pair.v.v[i], 0.0);
    double fu = pp.mu1 * std::pow(u, pp.p - 1);
    double fv = pp.mu2 * std::pow(v, pp.q - 1);
    if (pp.nu > 0.0 && u > 0.0 && v > 0.0) {
      fu += pp.nu * pp.alpha * std::pow(u, pp.alpha - 1) *
            std::pow(v, pp.beta);
      fv += pp.nu * pp.beta * std::pow(u, pp.alpha) *
            std::pow(v, pp.beta - 1);
    }
    gu[i] -= fu;
    gv[i] -= fv;
  }
  gu[g.M - 1] = 0.0;
  gv[g.M - 1] = 0.0;
}

}  // namespace gpe
