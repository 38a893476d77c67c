#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gpe/bubbles.hpp"

using namespace gpe;

namespace {

ProblemParams critical_params_n4() {
  ProblemParams pp;
  pp.N = 4;
  pp.p = 2.5;
  pp.q = 3.5;
  pp.alpha = 2.5;
  pp.beta = 1.5;
  pp.mu1 = 1.0;
  pp.mu2 = 1.0;
  pp.nu = 1.0;
  pp.a = 10.0;
  pp.b = 0.5;
  pp.validate();
  return pp;
}

}  // namespace

TEST_CASE("bubble profile basics") {
  SUBCASE("amplitude constant") {
    CHECK(std::pow(3.0 * 1.0, 0.25) == doctest::Approx(std::pow(3, 0.25)));
    // A_3 = 3^{1/4}; A_4 = 8^{1/2}
    auto fam3 = build_bubbles(3, {8}, make_grid(3, 4.0, 1025));
    CHECK(fam3.A_N == doctest::Approx(std::pow(3.0, 0.25)).epsilon(1e-14));
    auto fam4 = build_bubbles(4, {8}, make_grid(4, 4.0, 1025));
    CHECK(fam4.A_N == doctest::Approx(std::sqrt(8.0)).epsilon(1e-14));
  }

  SUBCASE("continuity at the matching radius and support cutoff") {
    for (int N : {3, 4})
      for (int n : {8, 64}) {
        const double left = bubble_profile(N, n, 1.0 - 1e-12);
        const double right = bubble_profile(N, n, 1.0 + 1e-12);
        CHECK(std::abs(left - right) < 1e-9 * left);
        CHECK(bubble_profile(N, n, 2.0) == 0.0);
        CHECK(bubble_profile(N, n, 5.0) == 0.0);
      }
  }

  SUBCASE("input validation") {
    auto g = make_grid(3, 4.0, 1025);
    CHECK_THROWS_AS(build_bubbles(2, {8}, g), ConfigError);
    CHECK_THROWS_AS(build_bubbles(3, {16, 8}, g), ConfigError);
  }
}

TEST_CASE("xi law and norm asymptotics") {
  ConstantsTable tab(4097, 20.0);

  SUBCASE("xi growth: linear for N=3, logarithmic for N=4") {
    // the slope statement is asymptotic; sample well past the crossover
    auto g3 = make_grid(3, 4.0, 1025);
    auto fam3 = build_bubbles(3, {32, 64, 128, 256}, g3);
    std::vector<double> lx, ly;
    for (std::size_t i = 1; i < fam3.n_values.size(); ++i) {
      lx.push_back(std::log(fam3.n_values[i]));
      ly.push_back(std::log(fam3.norms[i].xi));
    }
    CHECK(std::abs(line_fit(lx, ly).first - 1.0) < 0.05);

    // closed forms provide an independent oracle:
    //   N=3: xi(n) = n - arctan n, N=4: xi(n) = (ln(1+n^2) + 1/(1+n^2) - 1)/2
    for (std::size_t i = 0; i < fam3.n_values.size(); ++i) {
      const double n = fam3.n_values[i];
      CHECK(fam3.norms[i].xi ==
            doctest::Approx(n - std::atan(n)).epsilon(1e-8));
    }
    auto g4 = make_grid(4, 4.0, 1025);
    auto fam4 = build_bubbles(4, {8, 16, 32, 64}, g4);
    double prev_ratio = 0.0;
    for (std::size_t i = 0; i < fam4.n_values.size(); ++i) {
      const double n = fam4.n_values[i];
      const double exact =
          0.5 * (std::log(1 + n * n) + 1.0 / (1 + n * n) - 1.0);
      CHECK(fam4.norms[i].xi == doctest::Approx(exact).epsilon(1e-8));
      const double ratio = fam4.norms[i].xi / std::log(1 + n * n);
      if (i) CHECK(std::abs(ratio - prev_ratio) < 0.15 * ratio);
      prev_ratio = ratio;
    }
  }

  SUBCASE("gradient and critical norms approach S^{N/2} at the stated rates") {
    for (int N : {3, 4}) {
      auto g = make_grid(N, 4.0, 1025);
      auto fam = build_bubbles(N, {8, 16, 32, 64}, g);
      auto fit = bubble_asymptotics(fam, tab.sobolev(N));
      CHECK(std::abs(fit.grad_rate - (-(N - 2.0))) < 0.15 * (N - 2.0));
      CHECK(std::abs(fit.crit_rate - (-double(N))) < 0.15 * N);
      CHECK(fit.mass_law_spread < 0.15);
      const double target = std::pow(tab.sobolev(N), 0.5 * N);
      CHECK(std::abs(fit.grad_limit - target) < 0.05 * target);
      CHECK(std::abs(fit.crit_limit - target) < 0.01 * target);
    }
  }
}

TEST_CASE("t* closed form agrees with the bisection oracle") {
  ProblemParams pp = critical_params_n4();
  const double ts = bubble_t_star(pp);
  // oracle: positive root of (1/alpha) t - nu (beta/alpha)^{beta/2} t^{2*-1}
  const double root = bisect(
      [&](double t) {
        return t / pp.alpha -
               pp.nu * std::pow(pp.beta / pp.alpha, 0.5 * pp.beta) *
                   std::pow(t, pp.two_star() - 1.0);
      },
      0.1 * ts, 10.0 * ts);
  CHECK(std::abs(root - ts) < 1e-10 * ts);

  // the level-bound constant equals the maximum of the limit curve
  ConstantsTable tab(4097, 20.0);
  const double S = tab.sobolev(4);
  CHECK(std::abs(level_bound_gap(pp, S) - bubble_limit_curve(pp, S, ts)) <
        1e-10 * level_bound_gap(pp, S));
  // same identity in the N=4, alpha=beta=2 corner
  ProblemParams p2 = pp;
  p2.alpha = 2.0;
  p2.beta = 2.0;
  p2.validate();
  CHECK(std::abs(level_bound_gap(p2, S) -
                 bubble_limit_curve(p2, S, bubble_t_star(p2))) <
        1e-10 * level_bound_gap(p2, S));
}

TEST_CASE("normalized curves on the validated critical set") {
  ConstantsTable tab(4097, 20.0);
  ProblemParams pp = critical_params_n4();
  const double S = tab.sobolev(4);
  auto rep = analyze_geometry(pp, tab);
  REQUIRE(rep.feasible);
  auto grid = make_grid(4, 60.0, 8193);
  LocalMinimizeOptions lo;
  lo.pin_masses = true;
  auto base = local_minimize(pp, rep, grid, lo);
  REQUIRE(base.energy < 0.0);

  auto fam = build_bubbles(4, {8, 16, 32, 64}, grid);
  const double ts = bubble_t_star(pp);
  std::vector<double> tg{0.0};
  for (int k = 1; k <= 40; ++k) tg.push_back(3.0 * ts * k / 40.0);
  auto curves = bubble_curves(base.pair, pp, fam, tg);

  SUBCASE("exact anchoring and maximizer convergence") {
    for (const auto& c : curves.curves) {
      CHECK(std::abs(c.H0 - curves.base_level) <
            1e-10 * (1.0 + std::abs(curves.base_level)));
      CHECK(c.t_max > 0.0);
      CHECK(c.t_max < tg.back());
    }
    CHECK(std::abs(curves.curves.back().t_max - ts) < 0.05 * ts);
  }

  SUBCASE("renormalization keeps the prescribed masses") {
    // rebuild one normalized pair explicitly and measure the masses
    const int n = 16;
    const double t = 0.7;
    auto gev = make_grid(4, 60.0, 16385);
    RadialField u = resample(base.pair.u, gev), v = resample(base.pair.v, gev);
    RadialField U(gev);
    for (int i = 0; i < gev->M; ++i)
      U.v[i] = bubble_profile(4, n, gev->r[i]);
    const double sba = std::sqrt(pp.beta / pp.alpha);
    RadialField pu(gev), pv(gev);
    for (int i = 0; i < gev->M; ++i) {
      pu.v[i] = u.v[i] + t * U.v[i];
      pv.v[i] = v.v[i] + sba * t * U.v[i];
    }
    pu = scaled_to_mass(pu, pp.a);
    pv = scaled_to_mass(pv, pp.b);
    CHECK(std::abs(mass(pu) - pp.a) < 1e-12 * pp.a);
    CHECK(std::abs(mass(pv) - pp.b) < 1e-12 * pp.b);
  }

  SUBCASE("cross-term decay and coupling surrogate") {
    // int u U_n decays like n^{-(N-2)/2}
    std::vector<double> lx, ly;
    auto gev = make_grid(4, 60.0, 32769);
    RadialField u = resample(base.pair.u, gev);
    for (int n : {8, 16, 32, 64}) {
      RadialField U(gev);
      for (int i = 0; i < gev->M; ++i)
        U.v[i] = bubble_profile(4, n, gev->r[i]);
      lx.push_back(std::log(n));
      ly.push_back(std::log(std::abs(inner(u, U))));
    }
    const double rate = line_fit(lx, ly).first;
    CHECK(std::abs(rate - (-1.0)) < 0.2);
  }

  SUBCASE("limit curve and level bound") {
    // sup gap to the limit curve shrinks with n
    double prev_gap = 1e300;
    for (const auto& c : curves.curves) {
      double gap = 0.0;
      for (std::size_t k = 0; k < c.t.size(); ++k) {
        const double limit = curves.base_level +
                             bubble_limit_curve(pp, S, c.t[k]);
        gap = std::max(gap, std::abs(c.H[k] - limit));
      }
      CHECK(gap < prev_gap + 1e-9);
      prev_gap = gap;
    }

    auto lb = level_bound_check(curves, pp, S);
    CHECK(lb.margin_positive_at_largest);
    CHECK(lb.tail_monotone);
  }
}
