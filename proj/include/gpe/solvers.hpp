#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gpe/geometry.hpp"

namespace gpe {

enum class SolutionKind { local_min, mountain_pass };

struct SolutionRecord {
  FieldPair pair;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double energy = 0.0;
  double pohozaev_residual = 0.0;
  double mass_u = 0.0;
  double mass_v = 0.0;
  FiberClass classification = FiberClass::off_manifold;
  double grad_norm_sq = 0.0;
  double residual_sup = 0.0;
  int iterations = 0;
  double wall_time = 0.0;
  SolutionKind kind = SolutionKind::local_min;
};

struct PathState {
  std::vector<FieldPair> nodes;
  std::vector<double> energies;
  int climbing_index = 0;
  bool converged = false;
  int iterations = 0;
};

// ---------------------------------------------------------------------------
// Multiplier extraction: lambda_i from the constraint quotients, and the
// full Euler-Lagrange residual fields with those multipliers.
// ---------------------------------------------------------------------------
struct MultiplierExtraction {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  RadialField residual_u;
  RadialField residual_v;
  double residual_sup_u = 0.0;  // relative to the component amplitude
  double residual_sup_v = 0.0;
};

inline MultiplierExtraction extract_multipliers(const FieldPair& pair,
                                                const ProblemParams& pp) {
  const auto& g = *pair.u.grid;
  const double mu_mass = mass(pair.u);
  const double mv_mass = mass(pair.v);
  if (mu_mass <= 0.0 && mv_mass <= 0.0)
    throw ConfigError("extract_multipliers: both components have zero mass");

  PairNorms n = pair_norms(pair, pp);
  MultiplierExtraction out;
  const double gu_sq = grad_norm_sq(pair.u);
  const double gv_sq = n.K - gu_sq;
  if (mu_mass > 0.0)
    out.lambda1 =
        (-gu_sq + pp.mu1 * n.up + pp.nu * pp.alpha * n.cross) / mu_mass;
  if (mv_mass > 0.0)
    out.lambda2 =
        (-gv_sq + pp.mu2 * n.vq + pp.nu * pp.beta * n.cross) / mv_mass;

  std::vector<double> gu, gv;
  el_gradient(pair, pp, gu, gv);
  out.residual_u = RadialField(pair.u.grid);
  out.residual_v = RadialField(pair.v.grid);
  const double amp_u = std::max(pair.u.max_abs(), 1e-300);
  const double amp_v = std::max(pair.v.max_abs(), 1e-300);
  for (int i = 0; i < g.M; ++i) {
    out.residual_u.v[i] = gu[i] + out.lambda1 * pair.u.v[i];
    out.residual_v.v[i] = gv[i] + out.lambda2 * pair.v.v[i];
    out.residual_sup_u =
        std::max(out.residual_sup_u, std::abs(out.residual_u.v[i]) / amp_u);
    out.residual_sup_v =
        std::max(out.residual_sup_v, std::abs(out.residual_v.v[i]) / amp_v);
  }
  if (pair.u.max_abs() == 0.0) out.residual_sup_u = 0.0;
  if (pair.v.max_abs() == 0.0) out.residual_sup_v = 0.0;
  return out;
}

namespace detail {

inline void nonlinear_forces(const FieldPair& pair, const ProblemParams& pp,
                             std::vector<double>& fu, std::vector<double>& fv) {
  const auto& g = *pair.u.grid;
  fu.assign(g.M, 0.0);
  fv.assign(g.M, 0.0);
  for (int i = 0; i < g.M; ++i) {
    const double u = std::max(pair.u.v[i], 0.0);
    const double v = std::max(pair.v.v[i], 0.0);
    if (u > 0.0) fu[i] = pp.mu1 * std::pow(u, pp.p - 1);
    if (v > 0.0) fv[i] = pp.mu2 * std::pow(v, pp.q - 1);
    if (pp.nu > 0.0 && u > 0.0 && v > 0.0) {
      const double ua = std::pow(u, pp.alpha - 1);
      const double vb = std::pow(v, pp.beta - 1);
      fu[i] += pp.nu * pp.alpha * ua * vb * v;
      fv[i] += pp.nu * pp.beta * ua * u * vb;
    }
  }
}

inline double component_quotient_lambda(const RadialField& f,
                                        const std::vector<double>& force,
                                        double grad_sq) {
  const double m = mass(f);
  if (m <= 0.0) return 0.0;
  double fw = 0.0;
  for (int i = 0; i < f.size(); ++i)
    fw += f.grid->w[i] * force[i] * f.v[i];
  return (fw - grad_sq) / m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Local minimizer on the product of mass balls: semi-implicit projected
// gradient flow. The active multiplier estimate is folded into the implicit
// step so converged states satisfy the discrete KKT system exactly; the mass
// projection rescales a component only when its cap is exceeded.
// ---------------------------------------------------------------------------
struct LocalMinimizeOptions {
  double residual_tol = 1e-7;
  int max_iter = 200000;
  double tau0 = 1e-2;
  double tau_max = 4.0;
  int check_every = 20;
  // keep both components on their mass spheres (no ball relaxation); used
  // when a component binds only at scales beyond the domain
  bool pin_masses = false;
};

inline FieldPair default_local_init(const ProblemParams& pp,
                                    const GridPtr& grid) {
  FieldPair pair{RadialField(grid), RadialField(grid)};
  const double wu = grid->L / 5.0, wv = grid->L / 6.0;
  for (int i = 0; i < grid->M; ++i) {
    const double r = grid->r[i];
    pair.u.v[i] = std::exp(-r * r / (wu * wu));
    pair.v.v[i] = std::exp(-r * r / (wv * wv));
  }
  pair.u.v[grid->M - 1] = 0.0;
  pair.v.v[grid->M - 1] = 0.0;
  pair.u = scaled_to_mass(pair.u, pp.a);
  pair.v = scaled_to_mass(pair.v, pp.b);
  return pair;
}

inline SolutionRecord local_minimize(
    const ProblemParams& pp, const GeometryReport& geo, const GridPtr& grid,
    const LocalMinimizeOptions& opts = {},
    std::optional<FieldPair> init = std::nullopt) {
  if (!geo.feasible)
    throw ConfigError("local_minimize: geometry gate not satisfied");
  if (!geo.R) throw ConfigError("local_minimize: geometry lacks the barrier");
  const auto t_start = std::chrono::steady_clock::now();

  const int M = grid->M;
  FieldPair pair = init ? *init : default_local_init(pp, grid);
  if (mass(pair.u) > pp.a) pair.u = scaled_to_mass(pair.u, pp.a);
  if (mass(pair.v) > pp.b) pair.v = scaled_to_mass(pair.v, pp.b);

  double tau = opts.tau0;
  double tau_cached = -1.0;
  std::unique_ptr<HelmholtzSolve> solve;
  PairNorms n = pair_norms(pair, pp);
  double E = energy(n, pp);

  SolutionRecord rec;
  rec.kind = SolutionKind::local_min;
  std::vector<double> fu, fv;
  bool converged = false;
  // a component latches onto its mass sphere once the cap clips it, and
  // unlatches only when its multiplier turns negative; this keeps the
  // multiplier-corrected step from flapping between step types
  bool latch_u = opts.pin_masses || mass(pair.u) >= pp.a * (1.0 - 1e-12);
  bool latch_v = opts.pin_masses || mass(pair.v) >= pp.b * (1.0 - 1e-12);

  for (int it = 0; it < opts.max_iter && !converged; ++it) {
    detail::nonlinear_forces(pair, pp, fu, fv);
    const double gu_sq = grad_norm_sq(pair.u);
    const double gv_sq = n.K - gu_sq;
    const double quot_u =
        detail::component_quotient_lambda(pair.u, fu, gu_sq);
    const double quot_v =
        detail::component_quotient_lambda(pair.v, fv, gv_sq);
    if (!opts.pin_masses) {
      if (latch_u && quot_u < 0.0) latch_u = false;
      if (latch_v && quot_v < 0.0) latch_v = false;
    }
    const double lam_u = latch_u ? quot_u : 0.0;
    const double lam_v = latch_v ? quot_v : 0.0;
    const double lam_top = std::max(lam_u, lam_v);
    if (lam_top > 0.0) tau = std::min(tau, 0.9 / lam_top);

    if (tau != tau_cached) {
      solve = std::make_unique<HelmholtzSolve>(grid, 1.0 / tau);
      tau_cached = tau;
    }
    FieldPair next{RadialField(grid), RadialField(grid)};
    {
      RadialField rhs_u(grid), rhs_v(grid);
      for (int i = 0; i < M; ++i) {
        rhs_u.v[i] = (1.0 / tau - lam_u) * pair.u.v[i] + fu[i];
        rhs_v.v[i] = (1.0 / tau - lam_v) * pair.v.v[i] + fv[i];
      }
      next.u = (*solve)(rhs_u);
      next.v = (*solve)(rhs_v);
    }
    for (int i = 0; i < M; ++i) {
      next.u.v[i] = std::max(next.u.v[i], 0.0);
      next.v.v[i] = std::max(next.v.v[i], 0.0);
    }
    if (mass(next.u) > pp.a) latch_u = true;
    if (mass(next.v) > pp.b) latch_v = true;
    if (latch_u) next.u = scaled_to_mass(next.u, pp.a);
    if (latch_v) next.v = scaled_to_mass(next.v, pp.b);

    double step_amp = 0.0;
    for (int i = 0; i < M; ++i)
      step_amp = std::max({step_amp, std::abs(next.u.v[i] - pair.u.v[i]),
                           std::abs(next.v.v[i] - pair.v.v[i])});
    const double amp = std::max(pair.u.max_abs(), pair.v.max_abs());

    PairNorms n_next = pair_norms(next, pp);
    const double E_next = energy(n_next, pp);
    if (E_next > E + 1e-13 * (1.0 + std::abs(E)) && step_amp > 1e-12 * amp) {
      tau *= 0.5;
      if (tau < 1e-12)
        throw SolverError("local_minimize: backtracking step collapse");
      continue;
    }
    pair = std::move(next);
    n = n_next;
    E = E_next;
    rec.iterations = it + 1;
    tau = std::min(tau * 1.1, opts.tau_max);

    if (std::sqrt(n.K) > *geo.R)
      throw SolverError(
          "local_minimize: iterate escaped the gradient-norm ball; "
          "|grad| = " +
          format_g17(std::sqrt(n.K)) + " > R = " + format_g17(*geo.R) +
          " at iteration " + std::to_string(it));

    if ((it + 1) % opts.check_every == 0) {
      // a component that has decayed to numerical zero is pinned there
      const double amp_u = pair.u.max_abs(), amp_v = pair.v.max_abs();
      if (amp_v > 0.0 && amp_v < 1e-10 * amp_u) {
        std::fill(pair.v.v.begin(), pair.v.v.end(), 0.0);
        latch_v = false;
        n = pair_norms(pair, pp);
        E = energy(n, pp);
      } else if (amp_u > 0.0 && amp_u < 1e-10 * amp_v) {
        std::fill(pair.u.v.begin(), pair.u.v.end(), 0.0);
        latch_u = false;
        n = pair_norms(pair, pp);
        E = energy(n, pp);
      }
      auto ext = extract_multipliers(pair, pp);
      const double res = std::max(ext.residual_sup_u, ext.residual_sup_v);
      // a nonvanished component with a negative multiplier is still
      // draining mass through the open ball constraint; keep flowing
      const bool draining_u =
          !opts.pin_masses && pair.u.max_abs() > 0.0 &&
          ext.lambda1 < -1e-10 * (1.0 + std::abs(E));
      const bool draining_v =
          !opts.pin_masses && pair.v.max_abs() > 0.0 &&
          ext.lambda2 < -1e-10 * (1.0 + std::abs(E));
      if (res < opts.residual_tol && !draining_u && !draining_v) {
        rec.residual_sup = res;
        rec.lambda1 = ext.lambda1;
        rec.lambda2 = ext.lambda2;
        converged = true;
      }
    }
  }
  if (!converged)
    throw SolverError("local_minimize: no convergence after " +
                      std::to_string(opts.max_iter) + " iterations");

  rec.pair = pair;
  rec.energy = E;
  rec.grad_norm_sq = n.K;
  rec.mass_u = n.mass_u;
  rec.mass_v = n.mass_v;
  rec.pohozaev_residual = pohozaev(n, pp);
  rec.classification = classify(n, pp, 1e-4).classification;
  rec.wall_time = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t_start)
                      .count();
  return rec;
}

// ---------------------------------------------------------------------------
// Bordered Newton polish of the full constrained system
//   -Lap u + lambda1 u = f_u(u,v),  ||u||^2 = a,
//   -Lap v + lambda2 v = f_v(u,v),  ||v||^2 = b,
// in interleaved (u_i, v_i) ordering with two mass borders eliminated by a
// 2x2 Schur complement. Levenberg damping covers indefinite Jacobians at
// saddle points.
// ---------------------------------------------------------------------------
namespace detail {

struct NewtonPolishResult {
  bool converged = false;
  double residual = 0.0;  // sup EL residual relative to the amplitudes
  int steps = 0;
};

inline NewtonPolishResult coupled_newton_polish(FieldPair& pair, double& l1,
                                                double& l2,
                                                const ProblemParams& pp,
                                                double tol = 1e-10,
                                                int max_steps = 60) {
  const GridPtr grid = pair.u.grid;
  const int M = grid->M;
  const int n = M - 1;
  const int n2 = 2 * n;
  BandedMatrix K = stiffness_matrix(grid);

  auto forces = [&](const FieldPair& f, std::vector<double>& fu,
                    std::vector<double>& fv) {
    detail::nonlinear_forces(f, pp, fu, fv);
  };

  auto residual_of = [&](const FieldPair& f, double la, double lb,
                         std::vector<double>* F, double* Fa, double* Fb) {
    std::vector<double> fu, fv;
    forces(f, fu, fv);
    const auto lap_u = neg_laplacian(f.u);
    const auto lap_v = neg_laplacian(f.v);
    const double amp_u = std::max(f.u.max_abs(), 1e-300);
    const double amp_v = std::max(f.v.max_abs(), 1e-300);
    double sup = 0.0;
    double ma = -pp.a, mb = -pp.b;
    for (int i = 0; i < M; ++i) {
      ma += grid->w[i] * f.u.v[i] * f.u.v[i];
      mb += grid->w[i] * f.v.v[i] * f.v.v[i];
    }
    for (int i = 0; i < n; ++i) {
      const double ru = lap_u[i] + la * f.u.v[i] - fu[i];
      const double rv = lap_v[i] + lb * f.v.v[i] - fv[i];
      if (F) {
        (*F)[2 * i] = grid->w[i] * ru;
        (*F)[2 * i + 1] = grid->w[i] * rv;
      }
      sup = std::max({sup, std::abs(ru) / amp_u, std::abs(rv) / amp_v});
    }
    if (Fa) *Fa = 0.5 * ma;
    if (Fb) *Fb = 0.5 * mb;
    return std::max({sup, std::abs(ma) / pp.a, std::abs(mb) / pp.b});
  };

  NewtonPolishResult out;
  double res = residual_of(pair, l1, l2, nullptr, nullptr, nullptr);
  const double d_cap = 1e8;

  for (int step = 0; step < max_steps && res > tol; ++step) {
    std::vector<double> F(n2);
    double Fa = 0.0, Fb = 0.0;
    residual_of(pair, l1, l2, &F, &Fa, &Fb);

    bool improved = false;
    const double lm0 = std::abs(l1) + std::abs(l2) + 1.0;
    for (double rho : {0.0, 0.3 * lm0, 3.0 * lm0, 30.0 * lm0}) {
      BandedMatrix A(n2, 3);
      for (int i = 0; i < n; ++i) {
        const double u = std::max(pair.u.v[i], 0.0);
        const double v = std::max(pair.v.v[i], 0.0);
        double duu = pp.mu1 * (pp.p - 1) * std::pow(u, pp.p - 2);
        double dvv = pp.mu2 * (pp.q - 1) * std::pow(v, pp.q - 2);
        double duv = 0.0;
        if (pp.nu > 0.0 && u > 1e-150 && v > 1e-150) {
          duu += pp.nu * pp.alpha * (pp.alpha - 1) *
                 std::pow(u, pp.alpha - 2) * std::pow(v, pp.beta);
          dvv += pp.nu * pp.beta * (pp.beta - 1) * std::pow(u, pp.alpha) *
                 std::pow(v, pp.beta - 2);
          duv = pp.nu * pp.alpha * pp.beta * std::pow(u, pp.alpha - 1) *
                std::pow(v, pp.beta - 1);
        }
        duu = std::clamp(duu, -d_cap, d_cap);
        dvv = std::clamp(dvv, -d_cap, d_cap);
        duv = std::clamp(duv, -d_cap, d_cap);
        A.at(2 * i, 2 * i) = grid->w[i] * (l1 + rho - duu);
        A.at(2 * i + 1, 2 * i + 1) = grid->w[i] * (l2 + rho - dvv);
        A.at(2 * i, 2 * i + 1) = -grid->w[i] * duv;
        A.at(2 * i + 1, 2 * i) = -grid->w[i] * duv;
      }
      for (int i = 0; i < n; ++i) {
        A.at(2 * i, 2 * i) += K.get(i, i);
        A.at(2 * i + 1, 2 * i + 1) += K.get(i, i);
        if (i + 1 < n) {
          A.at(2 * i, 2 * (i + 1)) = K.get(i, i + 1);
          A.at(2 * (i + 1), 2 * i) = K.get(i + 1, i);
          A.at(2 * i + 1, 2 * (i + 1) + 1) = K.get(i, i + 1);
          A.at(2 * (i + 1) + 1, 2 * i + 1) = K.get(i + 1, i);
        }
      }
      std::vector<double> y, za(n2, 0.0), zb(n2, 0.0);
      try {
        BandedLU lu(A);
        y = F;
        for (int i = 0; i < n; ++i) {
          za[2 * i] = grid->w[i] * pair.u.v[i];
          zb[2 * i + 1] = grid->w[i] * pair.v.v[i];
        }
        lu.solve(y);
        lu.solve(za);
        lu.solve(zb);
      } catch (const SolverError&) {
        continue;
      }
      bool finite = true;
      for (int i = 0; i < n2 && finite; ++i)
        finite = std::isfinite(y[i]) && std::isfinite(za[i]) &&
                 std::isfinite(zb[i]);
      if (!finite) continue;

      // Schur complement on (dl1, dl2):
      //   du = -y - dl1 za - dl2 zb,  (W u)^T du = -Fa,  (W v)^T dv = -Fb
      double au_y = 0.0, au_za = 0.0, au_zb = 0.0;
      double bv_y = 0.0, bv_za = 0.0, bv_zb = 0.0;
      for (int i = 0; i < n; ++i) {
        const double wu = grid->w[i] * pair.u.v[i];
        const double wv = grid->w[i] * pair.v.v[i];
        au_y += wu * y[2 * i];
        au_za += wu * za[2 * i];
        au_zb += wu * zb[2 * i];
        bv_y += wv * y[2 * i + 1];
        bv_za += wv * za[2 * i + 1];
        bv_zb += wv * zb[2 * i + 1];
      }
      const double det = au_za * bv_zb - au_zb * bv_za;
      if (det == 0.0 || !std::isfinite(det)) continue;
      const double r1 = Fa - au_y, r2 = Fb - bv_y;
      const double dl1 = (r1 * bv_zb - r2 * au_zb) / det;
      const double dl2 = (au_za * r2 - bv_za * r1) / det;

      double s = 1.0;
      for (int half = 0; half < 10; ++half, s *= 0.5) {
        FieldPair trial = pair;
        for (int i = 0; i < n; ++i) {
          trial.u.v[i] -= s * (y[2 * i] + dl1 * za[2 * i] + dl2 * zb[2 * i]);
          trial.v.v[i] -=
              s * (y[2 * i + 1] + dl1 * za[2 * i + 1] + dl2 * zb[2 * i + 1]);
        }
        const double l1t = l1 + s * dl1, l2t = l2 + s * dl2;
        const double res_t =
            residual_of(trial, l1t, l2t, nullptr, nullptr, nullptr);
        if (std::isfinite(res_t) && res_t < res) {
          pair = std::move(trial);
          l1 = l1t;
          l2 = l2t;
          res = res_t;
          improved = true;
          break;
        }
      }
      if (improved) break;
    }
    out.steps = step + 1;
    if (!improved) break;
  }
  out.converged = res <= tol;
  out.residual = res;
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Descent over the unstable fiber sheet: minimize J(w) = Phi_w(t_w), with
// t_w the fiber maximizer, over the mass spheres. The fields are never
// dilated during the iteration; the dilation enters through closed-form
// t-weights on the operator and forces. A bordered Newton finish lands the
// exact discrete critical point.
// ---------------------------------------------------------------------------
struct PMinusDescendOptions {
  double residual_tol = 1e-7;
  int max_iter = 100000;
  double tau0 = 1e-2;
  double tau_max = 0.5;
  int check_every = 10;
  bool trace = false;
};

namespace detail {

/// Fiber maximizer t_w (the Phi'' < 0 critical point), warm-startable.
inline std::optional<double> fiber_max_point(const PairNorms& n,
                                             const ProblemParams& pp,
                                             std::optional<double> warm) {
  if (warm && *warm > 0.0) {
    double t = *warm;
    for (int k = 0; k < 60; ++k) {
      const auto f = fiber(n, pp, t);
      if (f.d2phi >= 0.0) break;
      const double step = f.dphi / f.d2phi;
      const double t_next = t - step;
      if (!(t_next > 0.2 * t && t_next < 5.0 * t)) break;
      t = t_next;
      if (std::abs(step) < 1e-14 * t) {
        const auto fc = fiber(n, pp, t);
        if (fc.d2phi < 0.0 && std::abs(fc.dphi) < 1e-10 * n.K) return t;
        break;
      }
    }
  }
  auto fa = classify(n, pp);
  return fa.t_crit;
}

}  // namespace detail

inline SolutionRecord pminus_descend(const ProblemParams& pp, FieldPair w,
                                     const PMinusDescendOptions& opts = {}) {
  const auto t_start = std::chrono::steady_clock::now();
  const GridPtr grid = w.u.grid;
  const int M = grid->M;
  w.u = scaled_to_mass(w.u, pp.a);
  w.v = scaled_to_mass(w.v, pp.b);

  PairNorms n = pair_norms(w, pp);
  std::optional<double> t_fiber = detail::fiber_max_point(n, pp, std::nullopt);
  if (!t_fiber)
    throw SolverError("pminus_descend: no fiber maximizer for the seed pair");
  double J = fiber(n, pp, *t_fiber).phi;

  const double gp = pp.gamma_p(), gq = pp.gamma_q(), gr = pp.gamma_r();
  double tau = opts.tau0;
  SolutionRecord rec;
  rec.kind = SolutionKind::mountain_pass;
  std::vector<double> fu(M), fv(M);
  bool converged = false;
  double J_best = 1e300;
  int J_stale = 0;

  for (int it = 0; it < opts.max_iter && !converged; ++it) {
    if (J < J_best - 1e-12 * (1.0 + std::abs(J_best))) {
      J_best = J;
      J_stale = 0;
    } else if (++J_stale > 300) {
      converged = true;  // sheet minimum reached; Newton takes over
      rec.iterations = it;
      break;
    }
    const double t = *t_fiber;
    const double t2 = t * t;
    const double wp = std::pow(t, gp), wq = std::pow(t, gq),
                 wr = std::pow(t, gr);
    // forces of w -> I(t*w) at fixed t
    for (int i = 0; i < M; ++i) {
      const double u = std::max(w.u.v[i], 0.0);
      const double v = std::max(w.v.v[i], 0.0);
      fu[i] = u > 0.0 ? wp * pp.mu1 * std::pow(u, pp.p - 1) : 0.0;
      fv[i] = v > 0.0 ? wq * pp.mu2 * std::pow(v, pp.q - 1) : 0.0;
      if (pp.nu > 0.0 && u > 0.0 && v > 0.0) {
        const double ua = std::pow(u, pp.alpha - 1);
        const double vb = std::pow(v, pp.beta - 1);
        fu[i] += wr * pp.nu * pp.alpha * ua * vb * v;
        fv[i] += wr * pp.nu * pp.beta * ua * u * vb;
      }
    }
    const double gu_sq = grad_norm_sq(w.u);
    const double gv_sq = n.K - gu_sq;
    const double lam_u =
        detail::component_quotient_lambda(w.u, fu, t2 * gu_sq);
    const double lam_v =
        detail::component_quotient_lambda(w.v, fv, t2 * gv_sq);

    // residual of the scaled system (w-frame)
    {
      auto lap_u = neg_laplacian(w.u);
      auto lap_v = neg_laplacian(w.v);
      double res = 0.0;
      const double amp_u = std::max(w.u.max_abs(), 1e-300);
      const double amp_v = std::max(w.v.max_abs(), 1e-300);
      for (int i = 0; i < M - 1; ++i) {
        res = std::max(res, std::abs(t2 * lap_u[i] - fu[i] + lam_u * w.u.v[i]) /
                                amp_u);
        res = std::max(res, std::abs(t2 * lap_v[i] - fv[i] + lam_v * w.v.v[i]) /
                                amp_v);
      }
      if (opts.trace && it % 200 == 0) {
        std::printf("  [pm] it=%d J=%.8g t=%.5g res=%.3e tau=%.3g\n", it, J, t,
                    res, tau);
        std::fflush(stdout);
      }
      // the sheet descent only needs to reach the Newton basin
      if (res < 1e-2 || tau < 1e-8) {
        converged = true;
        rec.iterations = it;
        break;
      }
    }

    const double lam_top = std::max({lam_u, lam_v, 0.0});
    if (lam_top > 0.0) tau = std::min(tau, 0.9 / lam_top);
    HelmholtzSolve solve(grid, 1.0 / (tau * t2));
    FieldPair next{RadialField(grid), RadialField(grid)};
    {
      RadialField rhs_u(grid), rhs_v(grid);
      for (int i = 0; i < M; ++i) {
        rhs_u.v[i] = ((1.0 / tau - lam_u) * w.u.v[i] + fu[i]) / t2;
        rhs_v.v[i] = ((1.0 / tau - lam_v) * w.v.v[i] + fv[i]) / t2;
      }
      next.u = solve(rhs_u);
      next.v = solve(rhs_v);
    }
    // J is invariant along the dilation orbit, so nothing damps that mode;
    // remove the dilation generator (N/2) w + r w' from the step to keep the
    // iterate from drifting along its fiber.
    {
      RadialField Du(grid), Dv(grid);
      const double h = grid->h;
      for (int i = 1; i < M - 1; ++i) {
        Du.v[i] = 0.5 * grid->N * w.u.v[i] +
                  grid->r[i] * (w.u.v[i + 1] - w.u.v[i - 1]) / (2 * h);
        Dv.v[i] = 0.5 * grid->N * w.v.v[i] +
                  grid->r[i] * (w.v.v[i + 1] - w.v.v[i - 1]) / (2 * h);
      }
      Du.v[0] = 0.5 * grid->N * w.u.v[0];
      Dv.v[0] = 0.5 * grid->N * w.v.v[0];
      double dd = 0.0, xd = 0.0;
      for (int i = 0; i < M; ++i) {
        const double wi = grid->w[i];
        dd += wi * (Du.v[i] * Du.v[i] + Dv.v[i] * Dv.v[i]);
        xd += wi * ((next.u.v[i] - w.u.v[i]) * Du.v[i] +
                    (next.v.v[i] - w.v.v[i]) * Dv.v[i]);
      }
      if (dd > 0.0) {
        const double c = xd / dd;
        for (int i = 0; i < M; ++i) {
          next.u.v[i] -= c * Du.v[i];
          next.v.v[i] -= c * Dv.v[i];
        }
      }
    }
    for (int i = 0; i < M; ++i) {
      next.u.v[i] = std::max(next.u.v[i], 0.0);
      next.v.v[i] = std::max(next.v.v[i], 0.0);
    }
    next.u = scaled_to_mass(next.u, pp.a);
    next.v = scaled_to_mass(next.v, pp.b);

    PairNorms n_next = pair_norms(next, pp);
    auto t_next = detail::fiber_max_point(n_next, pp, t_fiber);
    if (!t_next) {
      tau *= 0.5;
      if (tau < 1e-12)
        throw SolverError("pminus_descend: fiber maximizer lost");
      continue;
    }
    const double J_next = fiber(n_next, pp, *t_next).phi;
    if (J_next > J + 1e-13 * (1.0 + std::abs(J))) {
      tau *= 0.5;
      if (tau < 1e-12)
        throw SolverError("pminus_descend: backtracking step collapse");
      continue;
    }
    w = std::move(next);
    n = n_next;
    t_fiber = t_next;
    J = J_next;
    rec.iterations = it + 1;
    tau = std::min(tau * 1.05, opts.tau_max);

    // re-center the fiber occasionally so the final dilation is near the
    // identity and adds no interpolation noise to the residual
    if (std::abs(*t_fiber - 1.0) > 0.05) {
      FieldPair wc = dilate(*t_fiber, w);
      wc.u = scaled_to_mass(wc.u, pp.a);
      wc.v = scaled_to_mass(wc.v, pp.b);
      PairNorms nc = pair_norms(wc, pp);
      auto tc = detail::fiber_max_point(nc, pp, 1.0);
      if (tc) {
        w = std::move(wc);
        n = nc;
        t_fiber = tc;
        J = fiber(n, pp, *t_fiber).phi;
      }
    }
  }
  if (!converged)
    throw SolverError("pminus_descend: no convergence after " +
                      std::to_string(opts.max_iter) + " iterations");

  FieldPair sol = dilate(*t_fiber, w);
  sol.u = scaled_to_mass(sol.u, pp.a);
  sol.v = scaled_to_mass(sol.v, pp.b);
  auto ext = extract_multipliers(sol, pp);
  double l1 = ext.lambda1, l2 = ext.lambda2;
  auto newton = detail::coupled_newton_polish(
      sol, l1, l2, pp, std::min(1e-9, opts.residual_tol));
  if (!newton.converged)
    throw SolverError("pminus_descend: polish stalled at residual " +
                      format_g17(newton.residual));
  ext = extract_multipliers(sol, pp);
  PairNorms ns = pair_norms(sol, pp);
  rec.pair = sol;
  rec.lambda1 = ext.lambda1;
  rec.lambda2 = ext.lambda2;
  rec.residual_sup = std::max(ext.residual_sup_u, ext.residual_sup_v);
  rec.energy = energy(ns, pp);
  rec.grad_norm_sq = ns.K;
  rec.mass_u = ns.mass_u;
  rec.mass_v = ns.mass_v;
  rec.pohozaev_residual = pohozaev(ns, pp);
  rec.classification = classify(ns, pp, 1e-4).classification;
  rec.wall_time = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t_start)
                      .count();
  return rec;
}

/// Upper bound for the infimum of I over the unstable Pohozaev sheet:
/// project each pool member to its fiber maximizer and locally minimize.
inline double estimate_Z(const ProblemParams& pp,
                         const std::vector<FieldPair>& pool,
                         double residual_tol = 1e-6) {
  if (pool.empty()) throw ConfigError("estimate_Z: empty pool");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& seed : pool) {
    try {
      PMinusDescendOptions opts;
      opts.residual_tol = residual_tol;
      auto rec = pminus_descend(pp, seed, opts);
      best = std::min(best, rec.energy);
    } catch (const SolverError&) {
      // seeds without a fiber maximizer do not contribute
    }
  }
  if (!std::isfinite(best))
    throw SolverError("estimate_Z: no pool member could be projected");
  return best;
}

// ---------------------------------------------------------------------------
// Semitrivial gap curves: s -> I at the fiber projection of (z, s h) or
// (s h, z). All quantities reduce to closed forms in the cached norms, so
// the curve is exact up to quadrature of the base integrals.
// ---------------------------------------------------------------------------
enum class GapSide { u_side, v_side };

struct GapCurve {
  GapSide side = GapSide::u_side;
  double level = 0.0;  // scalar energy at s = 0
  std::vector<double> s;
  std::vector<double> energy;
  std::vector<double> fiber_t;
};

inline GapCurve semitrivial_gap_test(const ProblemParams& pp,
                                     const ScalarGroundState& state,
                                     const RadialField& probe, GapSide side,
                                     const std::vector<double>& s_grid) {
  if (std::abs(mass(probe) - 1.0) > 1e-8)
    throw ConfigError("semitrivial_gap_test: probe must have unit mass");
  check_same_grid(state.profile, probe);
  const double mass_budget =
      side == GapSide::u_side ? std::sqrt(pp.b) : std::sqrt(pp.a);
  for (double s : s_grid)
    if (s < 0.0 || s > mass_budget)
      throw ConfigError("semitrivial_gap_test: s outside the mass budget");

  const double Kz = grad_norm_sq(state.profile);
  const double Kh = grad_norm_sq(probe);
  GapCurve out;
  out.side = side;

  // coupling integral between the scalar profile and the probe
  const auto& g = *probe.grid;
  double cross = 0.0;
  for (int i = 0; i < g.M; ++i) {
    const double z = std::max(state.profile.v[i], 0.0);
    const double hval = std::abs(probe.v[i]);
    if (z > 0.0 && hval > 0.0) {
      if (side == GapSide::u_side)
        cross += g.w[i] * std::pow(z, pp.alpha) * std::pow(hval, pp.beta);
      else
        cross += g.w[i] * std::pow(hval, pp.alpha) * std::pow(z, pp.beta);
    }
  }

  const double z_p = lp_norm_pow(state.profile, pp.p);
  const double z_q = lp_norm_pow(state.profile, pp.q);
  const double h_p = lp_norm_pow(probe, pp.p);
  const double h_q = lp_norm_pow(probe, pp.q);

  for (double s : s_grid) {
    PairNorms n{};
    if (side == GapSide::u_side) {
      n.K = Kz + s * s * Kh;
      n.up = z_p;
      n.vq = std::pow(s, pp.q) * h_q;
      n.cross = std::pow(s, pp.beta) * cross;
    } else {
      n.K = Kz + s * s * Kh;
      n.up = std::pow(s, pp.p) * h_p;
      n.vq = z_q;
      n.cross = std::pow(s, pp.alpha) * cross;
    }
    auto fa = classify(n, pp);
    std::optional<double> t_proj =
        side == GapSide::u_side ? fa.s_crit : fa.t_crit;
    if (!t_proj)
      throw SolverError("semitrivial_gap_test: fiber projection failure at s=" +
                        format_g17(s));
    out.s.push_back(s);
    out.fiber_t.push_back(*t_proj);
    out.energy.push_back(fiber(n, pp, *t_proj).phi);
  }
  out.level = state.energy;
  return out;
}

/// Log-log slope of the drop below the scalar level over [s_lo, s_hi].
inline double gap_drop_exponent(const GapCurve& c, double s_lo, double s_hi) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < c.s.size(); ++i) {
    if (c.s[i] < s_lo || c.s[i] > s_hi || c.s[i] <= 0.0) continue;
    const double drop = c.level - c.energy[i];
    if (drop > 0.0) {
      xs.push_back(std::log(c.s[i]));
      ys.push_back(std::log(drop));
    }
  }
  if (xs.size() < 3)
    throw SolverError("gap_drop_exponent: too few points with a positive drop");
  return line_fit(xs, ys).first;
}

/// Quadratic coefficient of the exchange-of-stability case: for a unit-mass
/// probe h against the scalar profile z,
///   u_side (beta = 2):  1/2 ||grad h||^2 - nu int z^alpha h^2
///   v_side (alpha = 2): 1/2 ||grad h||^2 - nu int h^2 z^beta
inline double gap_quadratic_coefficient(const ProblemParams& pp,
                                        const ScalarGroundState& state,
                                        const RadialField& probe,
                                        GapSide side) {
  const auto& g = *probe.grid;
  const double zexp = side == GapSide::u_side ? pp.alpha : pp.beta;
  double wz = 0.0;
  for (int i = 0; i < g.M; ++i) {
    const double z = std::max(state.profile.v[i], 0.0);
    if (z > 0.0)
      wz += g.w[i] * std::pow(z, zexp) * probe.v[i] * probe.v[i];
  }
  return 0.5 * grad_norm_sq(probe) - pp.nu * wz;
}

// ---------------------------------------------------------------------------
// Mountain pass via a climbing string: nodes evolve by projected
// semi-implicit descent, the highest node's step is reflected across the
// path tangent, and the string is reparametrized to equal arclength. The
// climbing node is polished by descent over the unstable fiber sheet.
// ---------------------------------------------------------------------------
struct MountainPassOptions {
  int nodes = 32;
  double path_tau = 0.05;
  int max_iter = 20000;
  double climb_residual_tol = 1e-6;
  double polish_residual_tol = 1e-7;
  int reparam_every = 10;
  bool trace = false;
};

namespace detail {

inline double pair_dist(const FieldPair& a, const FieldPair& b) {
  const auto& g = *a.u.grid;
  double s = 0.0;
  for (int i = 0; i < g.M; ++i) {
    const double du = a.u.v[i] - b.u.v[i];
    const double dv = a.v.v[i] - b.v.v[i];
    s += g.w[i] * (du * du + dv * dv);
  }
  return std::sqrt(s);
}

inline void reparametrize_path(std::vector<FieldPair>& nodes,
                               const ProblemParams& pp) {
  const int K = static_cast<int>(nodes.size());
  const auto& g = *nodes[0].u.grid;
  std::vector<double> s(K, 0.0);
  for (int k = 1; k < K; ++k)
    s[k] = s[k - 1] + pair_dist(nodes[k], nodes[k - 1]);
  if (s[K - 1] <= 0.0) return;

  std::vector<FieldPair> out(nodes.begin(), nodes.end());
  for (int k = 1; k < K - 1; ++k) {
    const double target = s[K - 1] * k / (K - 1);
    int seg = 0;
    while (seg + 1 < K - 1 && s[seg + 1] < target) ++seg;
    // cubic interpolation across four consecutive nodes in arclength
    const int j0 = std::clamp(seg - 1, 0, K - 4);
    const double x[4] = {s[j0], s[j0 + 1], s[j0 + 2], s[j0 + 3]};
    double wgt[4];
    for (int a = 0; a < 4; ++a) {
      wgt[a] = 1.0;
      for (int b = 0; b < 4; ++b)
        if (a != b) wgt[a] *= (target - x[b]) / (x[a] - x[b]);
    }
    FieldPair np{RadialField(nodes[0].u.grid), RadialField(nodes[0].u.grid)};
    for (int i = 0; i < g.M; ++i) {
      double su = 0.0, sv = 0.0;
      for (int a = 0; a < 4; ++a) {
        su += wgt[a] * nodes[j0 + a].u.v[i];
        sv += wgt[a] * nodes[j0 + a].v.v[i];
      }
      np.u.v[i] = std::max(su, 0.0);
      np.v.v[i] = std::max(sv, 0.0);
    }
    np.u = scaled_to_mass(np.u, pp.a);
    np.v = scaled_to_mass(np.v, pp.b);
    out[k] = std::move(np);
  }
  nodes = std::move(out);
}

}  // namespace detail

inline std::pair<SolutionRecord, PathState> mountain_pass(
    const ProblemParams& pp, const GeometryReport& geo,
    const SolutionRecord& base, const GridPtr& grid,
    const MountainPassOptions& opts = {}) {
  if (base.kind != SolutionKind::local_min)
    throw ConfigError("mountain_pass: base must be a local minimizer");
  if (!geo.k0) throw ConfigError("mountain_pass: geometry lacks k0");
  const double m_level = base.energy;
  if (!(m_level < 0.0))
    throw ConfigError("mountain_pass: base level must be negative");
  const double k0 = *geo.k0;
  const int K = std::max(opts.nodes, 16);
  const int M = grid->M;

  // The evolving string spans dilations the grid can resolve, reaching past
  // the barrier; the endpoint is continued down to the 2 m(a,b) level only
  // after the climb converges (strong dilations need no fidelity there).
  // When the joint-dilation barrier sits beyond the resolvable range (weak
  // q-sector), the initial path dilates the v component alone, which
  // crosses its own supercritical barrier at moderate scales.
  PairNorms nb = pair_norms(base.pair, pp);
  auto field_width = [&](const RadialField& f) {
    const double fmax = f.max_abs();
    for (int i = 0; i < M; ++i)
      if (f.v[i] < fmax * std::exp(-1.0)) return grid->r[i];
    return grid->L;
  };
  const double res_cap_u = field_width(base.pair.u) / (12.0 * grid->h);
  const double res_cap_v = field_width(base.pair.v) / (12.0 * grid->h);

  std::vector<FieldPair> nodes;
  nodes.reserve(K);
  bool joint_path = false;
  {
    double T_phi = 2.0;
    while (fiber(nb, pp, T_phi).phi >= 2.0 * m_level && T_phi < 1e6)
      T_phi *= 2.0;
    const double T_cap = std::min(res_cap_u, res_cap_v);
    if (T_phi < 1e6 && T_phi <= T_cap) {
      joint_path = true;
      for (int k = 0; k < K; ++k) {
        const double t = 1.0 + (T_phi - 1.0) * k / (K - 1);
        FieldPair nk = k == 0 ? base.pair : dilate(t, base.pair);
        nk.u = scaled_to_mass(nk.u, pp.a);
        nk.v = scaled_to_mass(nk.v, pp.b);
        nodes.push_back(std::move(nk));
      }
    }
  }
  if (!joint_path) {
    auto v_node = [&](double t) {
      FieldPair nk{base.pair.u, dilate(t, base.pair.v)};
      nk.v = scaled_to_mass(nk.v, pp.b);
      return nk;
    };
    double T_v = 2.0;
    while (energy(v_node(T_v), pp) >= 2.0 * m_level && T_v < res_cap_v)
      T_v *= 1.5;
    if (energy(v_node(T_v), pp) >= 2.0 * m_level)
      throw SolverError(
          "mountain_pass: no resolvable path below 2 m(a,b); grid too coarse");
    for (int k = 0; k < K; ++k) {
      const double t = 1.0 + (T_v - 1.0) * k / (K - 1);
      nodes.push_back(k == 0 ? base.pair : v_node(t));
    }
  }

  PathState path;
  std::vector<double> E(K, 0.0);
  std::vector<double> fu, fv;
  int climb = K / 2;
  bool converged = false;
  int iterations = 0;
  double plateau_best = 1e300;
  int plateau_count = 0;

  HelmholtzSolve solve(grid, 1.0 / opts.path_tau);
  const double tau = opts.path_tau;

  for (int it = 0; it < opts.max_iter && !converged; ++it) {
    iterations = it + 1;
    std::vector<PairNorms> ns(K);
    for (int k = 0; k < K; ++k) {
      ns[k] = pair_norms(nodes[k], pp);
      E[k] = energy(ns[k], pp);
    }
    // hysteresis: hand the climbing role over only for a clear advantage
    int best = 1;
    for (int k = 1; k < K - 1; ++k)
      if (E[k] > E[best]) best = k;
    if (climb < 1 || climb > K - 2 ||
        E[best] > E[climb] + 0.02 * (std::abs(E[climb]) + 1.0))
      climb = best;

    if (opts.trace && it % 25 == 0) {
      std::printf("  [mp] it=%d climb=%d E_max=%.6g E_end=%.6g\n", it, climb,
                  E[climb], E[K - 1]);
      std::fflush(stdout);
    }

    if (it > 50 && E[best] - m_level < 0.25 * k0)
      throw SolverError("mountain_pass: path collapse (no barrier crossed)");

    // saddle-level plateau: the string has done its job once the max level
    // stops moving; the fiber-sheet polish finishes the convergence
    if (E[best] < plateau_best - 1e-8 * (1.0 + std::abs(plateau_best))) {
      plateau_best = E[best];
      plateau_count = 0;
    } else if (++plateau_count > 400) {
      climb = best;
      converged = true;
      break;
    }

    // tangent at the climbing node
    FieldPair tang{RadialField(grid), RadialField(grid)};
    {
      double norm = 0.0;
      for (int i = 0; i < M; ++i) {
        tang.u.v[i] = nodes[climb + 1].u.v[i] - nodes[climb - 1].u.v[i];
        tang.v.v[i] = nodes[climb + 1].v.v[i] - nodes[climb - 1].v.v[i];
        norm += grid->w[i] *
                (tang.u.v[i] * tang.u.v[i] + tang.v.v[i] * tang.v.v[i]);
      }
      norm = std::sqrt(std::max(norm, 1e-300));
      for (int i = 0; i < M; ++i) {
        tang.u.v[i] /= norm;
        tang.v.v[i] /= norm;
      }
    }

    std::vector<FieldPair> next(nodes.begin(), nodes.end());
    double climb_residual = 1e300;
    for (int k = 1; k < K - 1; ++k) {
      detail::nonlinear_forces(nodes[k], pp, fu, fv);
      const double gu_sq = grad_norm_sq(nodes[k].u);
      const double gv_sq = ns[k].K - gu_sq;
      // multiplier clamp keeps the semi-implicit right-hand side nonnegative
      const double lam_cap = 0.5 / tau;
      const double lam_u = std::min(
          detail::component_quotient_lambda(nodes[k].u, fu, gu_sq), lam_cap);
      const double lam_v = std::min(
          detail::component_quotient_lambda(nodes[k].v, fv, gv_sq), lam_cap);

      RadialField rhs_u(grid), rhs_v(grid);
      for (int i = 0; i < M; ++i) {
        rhs_u.v[i] = (1.0 / tau - lam_u) * nodes[k].u.v[i] + fu[i];
        rhs_v.v[i] = (1.0 / tau - lam_v) * nodes[k].v.v[i] + fv[i];
      }
      FieldPair stepped{solve(rhs_u), solve(rhs_v)};
      // displacement of the plain descent step
      for (int i = 0; i < M; ++i) {
        stepped.u.v[i] -= nodes[k].u.v[i];
        stepped.v.v[i] -= nodes[k].v.v[i];
      }
      if (k == climb) {
        // residual of the constrained gradient, from the step size
        auto ext = extract_multipliers(nodes[k], pp);
        climb_residual = std::max(ext.residual_sup_u, ext.residual_sup_v);
        // reflect the step across the path tangent
        double along = 0.0;
        for (int i = 0; i < M; ++i)
          along += grid->w[i] * (stepped.u.v[i] * tang.u.v[i] +
                                 stepped.v.v[i] * tang.v.v[i]);
        for (int i = 0; i < M; ++i) {
          stepped.u.v[i] -= 2.0 * along * tang.u.v[i];
          stepped.v.v[i] -= 2.0 * along * tang.v.v[i];
        }
      }
      for (int i = 0; i < M; ++i) {
        next[k].u.v[i] = std::max(nodes[k].u.v[i] + stepped.u.v[i], 0.0);
        next[k].v.v[i] = std::max(nodes[k].v.v[i] + stepped.v.v[i], 0.0);
      }
      next[k].u = scaled_to_mass(next[k].u, pp.a);
      next[k].v = scaled_to_mass(next[k].v, pp.b);
    }
    nodes = std::move(next);
    if ((it + 1) % opts.reparam_every == 0)
      detail::reparametrize_path(nodes, pp);

    if (climb_residual < opts.climb_residual_tol) converged = true;
  }

  // continue the terminal node along its fiber down to the 2 m(a,b) level
  {
    FieldPair& last = nodes[K - 1];
    int guard = 0;
    while (energy(last, pp) >= 2.0 * m_level && ++guard < 40) {
      last = dilate(1.5, last);
      last.u = scaled_to_mass(last.u, pp.a);
      last.v = scaled_to_mass(last.v, pp.b);
    }
    if (energy(last, pp) >= 2.0 * m_level)
      throw SolverError("mountain_pass: endpoint not below 2 m(a,b)");
    E[K - 1] = energy(last, pp);
  }

  path.nodes = nodes;
  path.energies = E;
  path.climbing_index = climb;
  path.converged = converged;
  path.iterations = iterations;
  if (!converged)
    throw SolverError("mountain_pass: climbing node stagnated at residual > " +
                      format_g17(opts.climb_residual_tol));

  PMinusDescendOptions popts;
  popts.residual_tol = opts.polish_residual_tol;
  SolutionRecord rec = pminus_descend(pp, nodes[climb], popts);
  rec.kind = SolutionKind::mountain_pass;
  return {rec, path};
}

}  // namespace gpe
