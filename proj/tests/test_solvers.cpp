#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cases.hpp"
#include "gpe/solvers.hpp"

using namespace gpe;

TEST_CASE("multiplier extraction on the exact 1-D soliton") {
  auto g = make_grid(1, 20.0, 16385);
  ProblemParams pp;
  pp.N = 1;
  pp.p = 4.0;
  pp.q = 7.0;
  pp.alpha = 1.5;
  pp.beta = 1.5;
  pp.nu = 0.7;  // arbitrary: the v = 0 pair decouples
  pp.a = 4.0;
  pp.b = 1.0;
  pp.validate();

  FieldPair pair{RadialField(g), RadialField(g)};
  for (int i = 0; i < g->M; ++i)
    pair.u.v[i] = std::sqrt(2.0) / std::cosh(g->r[i]);
  pair.u.v[g->M - 1] = 0.0;

  auto ext = extract_multipliers(pair, pp);
  CHECK(std::abs(ext.lambda1 - 1.0) < 1e-5);
  CHECK(ext.lambda2 == 0.0);
  CHECK(ext.residual_sup_v == 0.0);
  for (double rv : ext.residual_v.v) CHECK(rv == 0.0);

  FieldPair zeros{RadialField(g), RadialField(g)};
  CHECK_THROWS_AS(extract_multipliers(zeros, pp), ConfigError);
}

TEST_CASE("local minimizer decouples when the coupling vanishes") {
  ConstantsTable tab(4097, 20.0);
  ProblemParams pp = cases::case_bb().pp;
  pp.nu = 0.0;
  auto rep = analyze_geometry(pp, tab);
  REQUIRE(rep.feasible);
  auto grid = make_grid(3, 30.0, 2049);
  auto rec = local_minimize(pp, rep, grid);

  // the v component dies (its level is positive for q > 2+4/N), the u
  // component realizes the scalar level
  CHECK(rec.mass_v == 0.0);
  CHECK(rec.lambda2 == 0.0);
  auto st = scalar_ground_state(pp.p, pp.mu1, pp.a, grid);
  CHECK(rec.energy >= st.energy - 1e-6 * std::abs(st.energy));
  if (std::sqrt(grad_norm_sq(st.profile)) <= *rep.R0)
    CHECK(std::abs(rec.energy - st.energy) < 1e-5 * std::abs(st.energy));
}

TEST_CASE("two-solution pipeline on the validated alpha,beta<2 set") {
  ConstantsTable tab(4097, 20.0);
  auto c = cases::case_bb();
  auto rep = analyze_geometry(c.pp, tab);
  REQUIRE(rep.feasible);
  auto grid = make_grid(c.pp.N, 30.0, 4097);
  auto base = local_minimize(c.pp, rep, grid);

  SUBCASE("local minimizer record invariants") {
    CHECK(base.energy < 0.0);
    CHECK(base.lambda1 > 1e-8);
    CHECK(base.lambda2 > 1e-8);
    CHECK(std::abs(base.mass_u - c.pp.a) < 1e-6 * c.pp.a);
    CHECK(std::abs(base.mass_v - c.pp.b) < 1e-6 * c.pp.b);
    CHECK(std::abs(base.pohozaev_residual) < 1e-5 * base.grad_norm_sq);
    CHECK(base.grad_norm_sq <= *rep.R0 * *rep.R0);
    CHECK(base.classification == FiberClass::P_plus);
    CHECK(base.residual_sup < 1e-7);

    // strictly positive and radially decreasing profiles
    for (const RadialField* f : {&base.pair.u, &base.pair.v}) {
      const double floor = 1e-7 * f->max_abs();
      bool decreasing = true;
      for (int i = 1; i < grid->M; ++i) {
        if (f->v[i] < floor) break;
        if (f->v[i] > f->v[i - 1] + 1e-12) decreasing = false;
      }
      CHECK(decreasing);
      CHECK(f->v[0] > 0.0);
    }

    // energy ordering against the scalar levels (beta < 2 case)
    auto stp = scalar_ground_state(c.pp.p, c.pp.mu1, c.pp.a, grid);
    CHECK(base.energy < stp.energy);
  }

  SUBCASE("descent monotonicity via a coarse re-run") {
    // the energy reported from a shorter run bounds the converged one
    LocalMinimizeOptions lo;
    lo.residual_tol = 1e-4;
    auto rough = local_minimize(c.pp, rep, grid, lo);
    CHECK(rough.energy >= base.energy - 1e-10);
  }

  SUBCASE("mountain pass record and path invariants") {
    auto [mp, path] = mountain_pass(c.pp, rep, base, grid);
    CHECK(mp.energy >= *rep.k0 - 1e-9);
    CHECK(mp.energy > 0.0);
    CHECK(base.energy < 0.0);
    CHECK(mp.lambda1 > 1e-8);
    CHECK(mp.lambda2 > 1e-8);
    CHECK(mp.classification == FiberClass::P_minus);
    CHECK(std::abs(mp.mass_u - c.pp.a) < 1e-6 * c.pp.a);
    CHECK(std::abs(mp.mass_v - c.pp.b) < 1e-6 * c.pp.b);
    CHECK(std::abs(mp.pohozaev_residual) < 1e-4 * mp.grad_norm_sq);

    CHECK(path.converged);
    CHECK(path.energies.front() == doctest::Approx(base.energy).epsilon(1e-10));
    CHECK(path.energies.back() < 2.0 * base.energy);
    double emax = -1e300;
    for (double e : path.energies) emax = std::max(emax, e);
    CHECK(emax >= *rep.k0);
    for (const auto& node : path.nodes) {
      CHECK(std::abs(mass(node.u) - c.pp.a) < 1e-10 * c.pp.a);
      CHECK(std::abs(mass(node.v) - c.pp.b) < 1e-10 * c.pp.b);
    }

    // fiber curvature consistency: the local minimizer sits at a fiber
    // minimum, the mountain pass at a fiber maximum
    auto nb = pair_norms(base.pair, c.pp);
    auto nm = pair_norms(mp.pair, c.pp);
    for (double t : {0.9, 1.1}) {
      CHECK(fiber(nb, c.pp, t).phi > fiber(nb, c.pp, 1.0).phi);
      CHECK(fiber(nm, c.pp, t).phi < fiber(nm, c.pp, 1.0).phi);
    }

    // Z sandwich: M <= Z estimate from a pool containing the base pair and
    // near-semitrivial seeds; the estimate never increases with more seeds
    std::vector<FieldPair> pool{base.pair};
    const double z1 = estimate_Z(c.pp, pool);
    CHECK(mp.energy <= z1 + 1e-6);
    auto stq = scalar_ground_state(c.pp.q, c.pp.mu2, c.pp.b, grid);
    RadialField bump(grid);
    for (int i = 0; i < grid->M; ++i)
      bump.v[i] = std::exp(-grid->r[i] * grid->r[i]);
    bump.v[grid->M - 1] = 0.0;
    pool.push_back({scaled_to_mass(bump, 0.01 * c.pp.a), stq.profile});
    const double z2 = estimate_Z(c.pp, pool);
    CHECK(z2 <= z1 + 1e-12);
    CHECK(z2 >= *rep.k0 - 1e-9);
    // alpha < 2: the unstable-sheet level sits below the semitrivial level
    CHECK(z2 < stq.energy);
  }
}

TEST_CASE("semitrivial gap curves") {
  // a dedicated parameter point for the drop-exponent fits: the coupling
  // gain must dominate the quadratic probe cost across the fit window
  ProblemParams pp = cases::case_bb().pp;
  pp.a = 6.0;
  pp.nu = 8.0;
  pp.validate();
  auto grid = make_grid(3, 20.0, 16385);

  SUBCASE("curves anchor at the scalar level and drop like s^beta / s^alpha") {
    auto stp = scalar_ground_state(pp.p, pp.mu1, pp.a, grid);
    // probe shaped like the scalar state: maximal overlap per unit mass
    RadialField probe = scaled_to_mass(stp.profile, 1.0);

    std::vector<double> s_grid{0.0};
    for (double s = 1e-4; s <= 1.05e-2; s *= std::sqrt(10.0))
      s_grid.push_back(s);

    for (double beta : {1.5, 1.8}) {
      ProblemParams q = pp;
      q.beta = beta;
      q.validate();
      auto curve = semitrivial_gap_test(q, stp, probe, GapSide::u_side, s_grid);
      CHECK(curve.energy.front() ==
            doctest::Approx(stp.energy).epsilon(1e-9));
      const double fitted = gap_drop_exponent(curve, 1e-4, 1e-2);
      CHECK(std::abs(fitted - beta) < 0.1);
    }

    // v side: the drop exponent is alpha
    auto stq = scalar_ground_state(pp.q, pp.mu2, pp.b, grid);
    auto curve_v =
        semitrivial_gap_test(pp, stq, probe, GapSide::v_side, s_grid);
    CHECK(curve_v.energy.front() ==
          doctest::Approx(stq.energy).epsilon(1e-7));
    CHECK(std::abs(gap_drop_exponent(curve_v, 1e-4, 1e-2) - pp.alpha) < 0.1);

    // out-of-budget s rejected
    CHECK_THROWS_AS(semitrivial_gap_test(pp, stp, probe, GapSide::u_side,
                                         {2.0 * std::sqrt(pp.b)}),
                    ConfigError);
  }

  SUBCASE("beta = 2: quadratic coefficient flips sign across the threshold") {
    ProblemParams q = pp;
    q.beta = 2.0;
    q.a = 1.0;
    q.validate();
    auto gt = make_grid(3, 40.0, 8193);
    auto thr = nu_threshold(q.mu1, q.p, q.a, gt, q.alpha);
    REQUIRE(thr.value > 0.0);
    auto stp = scalar_ground_state(q.p, q.mu1, q.a, gt);
    const RadialField& probe = thr.minimizer;

    ProblemParams above = q, below = q;
    above.nu = 1.5 * thr.value;
    below.nu = 0.5 * thr.value;
    const double c_above =
        gap_quadratic_coefficient(above, stp, probe, GapSide::u_side);
    const double c_below =
        gap_quadratic_coefficient(below, stp, probe, GapSide::u_side);
    CHECK(c_above < 0.0);
    CHECK(c_below > 0.0);

    // the curve itself drops below / stays above the scalar level
    std::vector<double> s_grid;
    for (double s = 1e-3; s <= 3.2e-2; s *= 2.0) s_grid.push_back(s);
    auto curve_above =
        semitrivial_gap_test(above, stp, probe, GapSide::u_side, s_grid);
    auto curve_below =
        semitrivial_gap_test(below, stp, probe, GapSide::u_side, s_grid);
    CHECK(curve_above.energy.front() < stp.energy);
    CHECK(curve_below.energy.front() > stp.energy);
  }
}
