#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gpe/scalar.hpp"

using namespace gpe;

TEST_CASE("canonical soliton matches the 1-D closed form") {
  auto g = make_grid(1, 20.0, 32769);

  SUBCASE("eta = 4 gives sqrt(2) sech") {
    auto sol = canonical_soliton(4.0, g);
    CHECK(sol.residual < 1e-8);
    double sup = 0.0;
    for (int i = 0; i < g->M; ++i)
      sup = std::max(sup, std::abs(sol.profile.v[i] -
                                   std::sqrt(2.0) / std::cosh(g->r[i])));
    CHECK(sup <= 1e-6);
  }

  SUBCASE("general eta closed form, checked at eta = 3") {
    // oracle check first: the closed form satisfies -u'' + u = u^2 on the
    // grid, measured with a classical 3-point stencil
    RadialField exact(g);
    for (int i = 0; i < g->M; ++i) exact.v[i] = soliton_1d_exact(3.0, g->r[i]);
    exact.v[g->M - 1] = 0.0;
    const double h = g->h;
    double ode_res = 0.0;
    for (int i = 1; i < g->M - 1 && g->r[i] <= 15.0; ++i) {
      const double upp =
          (exact.v[i + 1] - 2.0 * exact.v[i] + exact.v[i - 1]) / (h * h);
      ode_res = std::max(ode_res, std::abs(-upp + exact.v[i] -
                                           exact.v[i] * exact.v[i]));
    }
    CHECK(ode_res < 1e-5);  // second-order stencil on the exact profile

    auto sol = canonical_soliton(3.0, g);
    double sup = 0.0;
    for (int i = 0; i < g->M; ++i)
      sup = std::max(sup, std::abs(sol.profile.v[i] - exact.v[i]));
    CHECK(sup <= 1e-5);
  }

  SUBCASE("profiles are positive and radially decreasing") {
    for (double eta : {3.0, 4.0, 5.0}) {
      auto sol = canonical_soliton(eta, g);
      const double floor = 1e-8 * sol.profile.max_abs();
      bool decreasing = true;
      for (int i = 1; i < g->M; ++i) {
        if (sol.profile.v[i] < floor) break;
        if (sol.profile.v[i] > sol.profile.v[i - 1] + 1e-12) decreasing = false;
      }
      CHECK(decreasing);
      CHECK(sol.profile.v[0] > 0.0);
    }
  }

  SUBCASE("exponent range is enforced") {
    CHECK_THROWS_AS(canonical_soliton(2.0, g), ConfigError);
    auto g3 = make_grid(3, 15.0, 1025);
    CHECK_THROWS_AS(canonical_soliton(6.5, g3), ConfigError);  // beyond 2*=6
  }
}

TEST_CASE("scalar ground state: canonical normalization at N=1") {
  auto g = make_grid(1, 20.0, 32769);
  auto st = scalar_ground_state(4.0, 1.0, 4.0, g);
  CHECK(std::abs(st.lambda - 1.0) < 1e-5);
  CHECK(std::abs(st.energy - (-2.0 / 3.0)) < 1e-5);
  CHECK(std::abs(mass(st.profile) - 4.0) < 1e-8 * 4.0);
  CHECK(st.residual < 1e-7);
  CHECK(std::abs(st.pohozaev_residual) < 1e-6 * grad_norm_sq(st.profile));
  CHECK_THROWS_AS(scalar_ground_state(6.0, 1.0, 1.0, g), ConfigError);
}

TEST_CASE("sign dichotomy and monotonicity of the scalar level") {
  // masses are chosen relative to the canonical soliton mass so that the
  // rescaling parameter lambda stays O(1) and the profile fits the domain
  auto masses_near_canonical = [](double eta, const GridPtr& g) {
    const double m0 = mass(canonical_soliton(eta, g).profile);
    return std::vector<double>{0.85 * m0, 1.2 * m0};
  };

  SUBCASE("N = 1") {
    auto g = make_grid(1, 30.0, 4097);
    for (double eta : {3.0, 4.0, 5.0})
      for (double a : masses_near_canonical(eta, g)) {
        auto st = scalar_ground_state(eta, 1.0, a, g);
        CHECK(st.energy < 0.0);
      }
    for (double eta : {7.0, 8.0, 9.0})
      for (double a : masses_near_canonical(eta, g)) {
        auto st = scalar_ground_state(eta, 1.0, a, g);
        CHECK(st.energy > 0.0);
      }
  }
  SUBCASE("N = 3") {
    auto g = make_grid(3, 30.0, 4097);
    for (double eta : {2.5, 2.8, 3.0})
      for (double a : masses_near_canonical(eta, g)) {
        auto st = scalar_ground_state(eta, 1.0, a, g);
        CHECK(st.energy < 0.0);
      }
    for (double eta : {4.0, 4.5, 5.0})
      for (double a : masses_near_canonical(eta, g)) {
        auto st = scalar_ground_state(eta, 1.0, a, g);
        CHECK(st.energy > 0.0);
      }
  }

  SUBCASE("level decreases strictly in the mass") {
    auto g = make_grid(1, 30.0, 4097);
    double prev = 1e300;
    for (double a : {0.5, 1.0, 2.0, 4.0}) {
      const double m = scalar_ground_state(4.0, 1.0, a, g).energy;
      CHECK(m < prev);
      prev = m;
    }
  }

  SUBCASE("supercritical level is positive and decays to zero in the mass") {
    auto g3 = make_grid(3, 30.0, 4097);
    const double m0 = mass(canonical_soliton(4.0, g3).profile);
    double prev = 1e300;
    for (double mult : {0.8, 1.6, 3.2}) {
      const double m = scalar_ground_state(4.0, 1.0, mult * m0, g3).energy;
      CHECK(m > 0.0);
      CHECK(m < prev);
      prev = m;
    }
  }
}

TEST_CASE("flow route agrees with the rescaling route") {
  auto g = make_grid(3, 20.0, 2049);
  const double eta = 2.8, mu = 1.0;
  // mass near the canonical one, so the state fits the domain comfortably
  const double a = 0.9 * mass(canonical_soliton(eta, g).profile);
  auto st = scalar_ground_state(eta, mu, a, g);

  Rng rng(99);
  double sup_between = 0.0;
  RadialField first_profile;
  for (int trial = 0; trial < 5; ++trial) {
    auto init = random_bump_field(g, rng);
    auto flow = scalar_flow_minimize(eta, mu, a, g, init);
    CHECK(flow.residual < 1e-8);
    double sup = 0.0;
    for (int i = 0; i < g->M; ++i)
      sup = std::max(sup, std::abs(flow.profile.v[i] - st.profile.v[i]));
    CHECK(sup < 1e-4 * st.profile.max_abs());
    if (trial == 0) first_profile = flow.profile;
    else
      for (int i = 0; i < g->M; ++i)
        sup_between =
            std::max(sup_between, std::abs(flow.profile.v[i] - first_profile.v[i]));
  }
  CHECK(sup_between < 1e-4 * st.profile.max_abs());
  CHECK_THROWS_AS(
      scalar_flow_minimize(4.0, 1.0, 1.0, g, random_bump_field(g, rng)),
      ConfigError);  // supercritical: sphere flow not applicable
}

TEST_CASE("coupling threshold via the weighted Rayleigh quotient") {
  SUBCASE("N in {1,2} returns the analytic zero with a decaying trend") {
    auto g = make_grid(1, 30.0, 2049);
    auto t = nu_threshold(1.0, 4.0, 1.0, g, 2.0);
    CHECK(t.analytic_zero);
    CHECK(t.value == 0.0);
    REQUIRE(t.domain_trend.size() == 3);
    CHECK(t.domain_trend[1].second < t.domain_trend[0].second);
    CHECK(t.domain_trend[2].second < t.domain_trend[1].second);
  }

  SUBCASE("N = 3: positive, decreasing in mass, self-consistent eigenpair") {
    auto g = make_grid(3, 30.0, 2049);
    const double m_can = mass(canonical_soliton(2.8, g).profile);
    double prev = 1e300;
    for (double m : {0.7 * m_can, 1.0 * m_can, 1.4 * m_can}) {
      auto t = nu_threshold(1.0, 2.8, m, g, 2.0);
      CHECK_FALSE(t.analytic_zero);
      CHECK(t.value > 0.0);
      CHECK(t.value < prev);
      prev = t.value;

      // substituting the minimizer back reproduces the eigenvalue
      auto st = scalar_ground_state(2.8, 1.0, m, g);
      RadialField zw(g);
      for (int i = 0; i < g->M; ++i)
        zw.v[i] = std::pow(std::max(st.profile.v[i], 0.0), 2.0) *
                  t.minimizer.v[i] * t.minimizer.v[i];
      const double quotient = grad_norm_sq(t.minimizer) / integrate(zw);
      CHECK(std::abs(quotient - 2.0 * t.value) < 1e-6 * quotient);

      // the canonical-soliton form of the threshold agrees
      CHECK(std::abs(t.via_canonical - t.value) < 1e-3 * t.value);
    }
  }
}
