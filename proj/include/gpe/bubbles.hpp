#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "gpe/constants.hpp"
#include "gpe/functionals.hpp"
#include "gpe/solvers.hpp"

namespace gpe {

// ---------------------------------------------------------------------------
// Truncated extremal bubbles: U_n(r) is the Sobolev extremal profile at
// concentration scale 1/n, cut linearly on [1, 2) and zero beyond. Norms are
// computed by substitution quadrature (s = n r), which keeps the integrands
// n-independent and resolves the concentration exactly.
// ---------------------------------------------------------------------------
struct BubbleNorms {
  double mass = 0.0;       // ||U_n||_2^2
  double grad_sq = 0.0;    // ||grad U_n||_2^2
  double crit = 0.0;       // ||U_n||_{2*}^{2*}
  double xi = 0.0;         // int_0^n s^{N-1} (1+s^2)^{2-N} ds
};

struct BubbleFamily {
  int N = 3;
  double A_N = 0.0;  // [N(N-2)]^{(N-2)/4}
  std::vector<int> n_values;
  std::vector<BubbleNorms> norms;
  GridPtr grid;  // profiles are evaluated exactly on demand
};

inline double bubble_profile(int N, int n, double r) {
  const double A = std::pow(N * (N - 2.0), 0.25 * (N - 2.0));
  if (r < 1.0)
    return A * std::pow(n / (1.0 + double(n) * n * r * r), 0.5 * (N - 2.0));
  if (r < 2.0)
    return A * std::pow(n / (1.0 + double(n) * n), 0.5 * (N - 2.0)) * (2.0 - r);
  return 0.0;
}

inline BubbleFamily build_bubbles(int N, const std::vector<int>& n_values,
                                  const GridPtr& grid) {
  if (N != 3 && N != 4) throw ConfigError("build_bubbles: N must be 3 or 4");
  for (std::size_t i = 1; i < n_values.size(); ++i)
    if (n_values[i] <= n_values[i - 1])
      throw ConfigError("build_bubbles: n values must increase");
  if (!n_values.empty() &&
      grid->h > 0.25 / n_values.back() && grid->L < 2.0)
    throw ConfigError("build_bubbles: grid too coarse for the largest n");

  BubbleFamily fam;
  fam.N = N;
  fam.A_N = std::pow(N * (N - 2.0), 0.25 * (N - 2.0));
  fam.n_values = n_values;
  fam.grid = grid;
  const double omega = sphere_surface(N);
  const double two_star = 2.0 * N / (N - 2.0);
  const double A = fam.A_N;

  for (int n : n_values) {
    BubbleNorms bn;
    const double dn = n;
    // core part via s = n r on [0, n)
    bn.xi = detail::simpson(
        [&](double s) {
          return std::pow(s, N - 1) * std::pow(1.0 + s * s, 2.0 - N);
        },
        0.0, dn, 40000);
    const double core_mass = A * A * bn.xi / (dn * dn);
    const double core_grad =
        A * A * (N - 2.0) * (N - 2.0) *
        detail::simpson(
            [&](double s) {
              return std::pow(s, N + 1) *
                     std::pow(1.0 + s * s, -static_cast<double>(N));
            },
            0.0, dn, 40000);
    const double core_crit =
        std::pow(A, two_star) *
        detail::simpson(
            [&](double s) {
              return std::pow(s, N - 1) *
                     std::pow(1.0 + s * s, -static_cast<double>(N));
            },
            0.0, dn, 40000);
    // linear cut on [1, 2)
    const double B = A * std::pow(dn / (1.0 + dn * dn), 0.5 * (N - 2.0));
    const double cut_mass =
        B * B * detail::simpson(
                    [&](double r) {
                      return (2.0 - r) * (2.0 - r) * std::pow(r, N - 1);
                    },
                    1.0, 2.0, 4000);
    const double cut_grad =
        B * B *
        detail::simpson([&](double r) { return std::pow(r, N - 1); }, 1.0,
                        2.0, 4000);
    const double cut_crit =
        std::pow(B, two_star) *
        detail::simpson(
            [&](double r) {
              return std::pow(2.0 - r, two_star) * std::pow(r, N - 1);
            },
            1.0, 2.0, 4000);
    bn.mass = omega * (core_mass + cut_mass);
    bn.grad_sq = omega * (core_grad + cut_grad);
    bn.crit = omega * (core_crit + cut_crit);
    fam.norms.push_back(bn);
  }
  return fam;
}

// ---------------------------------------------------------------------------
// Asymptotic rates of the bubble norms: the gradient and critical norms
// approach S^{N/2} at rates -(N-2) and -N; the mass follows xi(n)/n^2.
// Fits use the largest n values (the statements are asymptotic).
// ---------------------------------------------------------------------------
struct BubbleFitReport {
  double grad_rate = 0.0;   // fitted log-log slope of |grad_sq - S^{N/2}|
  double crit_rate = 0.0;   // fitted slope of |crit - S^{N/2}|
  double mass_law_spread = 0.0;  // max relative spread of mass/(xi/n^2)
  double grad_limit = 0.0;
  double crit_limit = 0.0;
};

inline BubbleFitReport bubble_asymptotics(const BubbleFamily& fam, double S,
                                          int fit_points = 3) {
  if (fam.n_values.size() < 2)
    throw ConfigError("bubble_asymptotics: need several n values");
  const double target = std::pow(S, 0.5 * fam.N);
  BubbleFitReport rep;
  std::vector<double> lx_g, ly_g, lx_c, ly_c;
  const int first =
      std::max<int>(0, static_cast<int>(fam.n_values.size()) - fit_points);
  for (std::size_t i = first; i < fam.n_values.size(); ++i) {
    const double n = fam.n_values[i];
    const double dg = std::abs(fam.norms[i].grad_sq - target);
    const double dc = std::abs(fam.norms[i].crit - target);
    if (dg > 0) {
      lx_g.push_back(std::log(n));
      ly_g.push_back(std::log(dg));
    }
    if (dc > 0) {
      lx_c.push_back(std::log(n));
      ly_c.push_back(std::log(dc));
    }
  }
  rep.grad_rate = line_fit(lx_g, ly_g).first;
  rep.crit_rate = line_fit(lx_c, ly_c).first;
  rep.grad_limit = fam.norms.back().grad_sq;
  rep.crit_limit = fam.norms.back().crit;

  double lo = 1e300, hi = -1e300;
  for (std::size_t i = first; i < fam.n_values.size(); ++i) {
    const double n = fam.n_values[i];
    const double ratio = fam.norms[i].mass / (fam.norms[i].xi / (n * n));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  rep.mass_law_spread = (hi - lo) / hi;
  return rep;
}

// ---------------------------------------------------------------------------
// Normalized two-component bubble test curves
//   t -> I( sqrt(a)/||u + t U_n|| (u + t U_n),
//           sqrt(b)/||v + sqrt(beta/alpha) t U_n|| (v + ...) )
// evaluated on a refined grid so the concentration core is resolved.
// ---------------------------------------------------------------------------
struct BubbleCurve {
  int n = 0;
  std::vector<double> t;
  std::vector<double> H;
  double t_max = 0.0;  // maximizer of H_n
  double H_max = 0.0;
  double H0 = 0.0;  // value at t = 0 (the base level on the evaluation grid)
};

struct BubbleCurveSet {
  std::vector<BubbleCurve> curves;
  double base_level = 0.0;  // I(u, v) on the evaluation grid
  double t_star = 0.0;      // limit of the maximizers
};

/// Closed-form limit of the curve maximizers.
inline double bubble_t_star(const ProblemParams& pp) {
  const double Nm2 = pp.N - 2.0;
  return std::pow(pp.nu, -0.25 * Nm2) *
         std::pow(pp.alpha, (4.0 - Nm2 * pp.alpha) / 8.0) *
         std::pow(pp.beta, -Nm2 * pp.beta / 8.0);
}

/// Pointwise limit of H_n(t) - m(a,b).
inline double bubble_limit_curve(const ProblemParams& pp, double S, double t) {
  const double ts = pp.two_star();
  return std::pow(S, 0.5 * pp.N) *
         (ts / (2.0 * pp.alpha) * t * t -
          pp.nu * std::pow(pp.beta / pp.alpha, 0.5 * pp.beta) *
              std::pow(t, ts));
}

inline BubbleCurveSet bubble_curves(const FieldPair& base,
                                    const ProblemParams& pp,
                                    const BubbleFamily& fam,
                                    const std::vector<double>& t_grid) {
  if (!pp.is_critical())
    throw ConfigError("bubble_curves: critical regime required");
  if (t_grid.size() < 8 || t_grid.front() != 0.0)
    throw ConfigError("bubble_curves: t grid must start at 0");
  const int n_max = fam.n_values.empty() ? 8 : fam.n_values.back();

  // evaluation grid: resolve the core scale 1/n_max
  const double h_needed = 1.0 / (8.0 * n_max);
  const GridPtr gb = base.u.grid;
  int M_ev = std::max<int>(gb->M, static_cast<int>(gb->L / h_needed) + 1);
  auto gev = make_grid(gb->N, gb->L, M_ev);
  if (mass(base.u) <= 0.0 || mass(base.v) <= 0.0)
    throw ConfigError("bubble_curves: base components must be nonzero");
  // exact masses on the evaluation grid make the t = 0 normalization the
  // identity, anchoring H_n(0) at the base level to machine precision
  RadialField u = scaled_to_mass(resample(base.u, gev), pp.a);
  RadialField v = scaled_to_mass(resample(base.v, gev), pp.b);

  const double sba = std::sqrt(pp.beta / pp.alpha);
  BubbleCurveSet out;
  out.t_star = bubble_t_star(pp);
  {
    PairNorms n0 = pair_norms({u, v}, pp);
    out.base_level = energy(n0, pp);
  }

  const double Ku = grad_norm_sq(u), Kv = grad_norm_sq(v);
  const double mu_mass = mass(u), mv_mass = mass(v);

  for (std::size_t bi = 0; bi < fam.n_values.size(); ++bi) {
    const int n = fam.n_values[bi];
    RadialField U(gev);
    for (int i = 0; i < gev->M; ++i)
      U.v[i] = bubble_profile(fam.N, n, gev->r[i]);

    const double UU = mass(U), gUU = grad_norm_sq(U);
    const double uU = inner(u, U), vU = inner(v, U);
    const double guU = grad_inner(u, U), gvU = grad_inner(v, U);

    auto H_of = [&](double t) {
      const double m_u = mu_mass + 2.0 * t * uU + t * t * UU;
      const double m_v =
          mv_mass + 2.0 * sba * t * vU + sba * sba * t * t * UU;
      const double cu = std::sqrt(pp.a / m_u);
      const double cv = std::sqrt(pp.b / m_v);
      const double K_u = Ku + 2.0 * t * guU + t * t * gUU;
      const double K_v = Kv + 2.0 * sba * t * gvU + sba * sba * t * t * gUU;
      double pnorm = 0.0, qnorm = 0.0, cross = 0.0;
      for (int i = 0; i < gev->M; ++i) {
        const double uu = std::max(u.v[i] + t * U.v[i], 0.0);
        const double vv = std::max(v.v[i] + sba * t * U.v[i], 0.0);
        const double w = gev->w[i];
        if (uu > 0.0) pnorm += w * std::pow(uu, pp.p);
        if (vv > 0.0) qnorm += w * std::pow(vv, pp.q);
        if (uu > 0.0 && vv > 0.0)
          cross += w * std::pow(uu, pp.alpha) * std::pow(vv, pp.beta);
      }
      return 0.5 * (cu * cu * K_u + cv * cv * K_v) -
             pp.mu1 / pp.p * std::pow(cu, pp.p) * pnorm -
             pp.mu2 / pp.q * std::pow(cv, pp.q) * qnorm -
             pp.nu * std::pow(cu, pp.alpha) * std::pow(cv, pp.beta) * cross;
    };

    BubbleCurve c;
    c.n = n;
    for (double t : t_grid) {
      c.t.push_back(t);
      c.H.push_back(H_of(t));
    }
    c.H0 = c.H.front();
    // coarse argmax, then golden refinement
    std::size_t k_best = 0;
    for (std::size_t k = 0; k < c.H.size(); ++k)
      if (c.H[k] > c.H[k_best]) k_best = k;
    const double lo = c.t[k_best == 0 ? 0 : k_best - 1];
    const double hi = c.t[std::min(k_best + 1, c.t.size() - 1)];
    c.t_max = golden_max(H_of, lo, hi, 1e-10);
    c.H_max = H_of(c.t_max);
    out.curves.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Strict level bound: m(a,b) + (2/(N-2)) nu^{-(N-2)/2} alpha^{-(N-2)alpha/4}
// beta^{-(N-2)beta/4} S^{N/2} must dominate the curve maxima for large n.
// ---------------------------------------------------------------------------
struct LevelBoundReport {
  double bound_gap = 0.0;  // the constant added to the base level
  std::vector<int> n_values;
  std::vector<double> margins;  // bound - H_n(t_n)
  bool margin_positive_at_largest = false;
  bool tail_monotone = false;
};

inline double level_bound_gap(const ProblemParams& pp, double S) {
  const double Nm2 = pp.N - 2.0;
  return 2.0 / Nm2 * std::pow(pp.nu, -0.5 * Nm2) *
         std::pow(pp.alpha, -Nm2 * pp.alpha / 4.0) *
         std::pow(pp.beta, -Nm2 * pp.beta / 4.0) * std::pow(S, 0.5 * pp.N);
}

inline LevelBoundReport level_bound_check(const BubbleCurveSet& curves,
                                          const ProblemParams& pp, double S) {
  LevelBoundReport rep;
  rep.bound_gap = level_bound_gap(pp, S);
  const double bound = curves.base_level + rep.bound_gap;
  for (const auto& c : curves.curves) {
    rep.n_values.push_back(c.n);
    rep.margins.push_back(bound - c.H_max);
  }
  if (!rep.margins.empty())
    rep.margin_positive_at_largest = rep.margins.back() > 0.0;
  if (rep.margins.size() >= 3) {
    const std::size_t k = rep.margins.size();
    const bool inc = rep.margins[k - 2] >= rep.margins[k - 3] &&
                     rep.margins[k - 1] >= rep.margins[k - 2];
    const bool dec = rep.margins[k - 2] <= rep.margins[k - 3] &&
                     rep.margins[k - 1] <= rep.margins[k - 2];
    rep.tail_monotone = inc || dec;
  }
  return rep;
}

}  // namespace gpe
