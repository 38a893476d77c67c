#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gpe/functionals.hpp"

using namespace gpe;

namespace {

ProblemParams subcritical_params() {
  ProblemParams pp;
  pp.N = 3;
  pp.p = 2.8;
  pp.q = 4.5;
  pp.alpha = 1.5;
  pp.beta = 1.5;
  pp.mu1 = 1.0;
  pp.mu2 = 1.0;
  pp.nu = 0.5;
  pp.a = 0.3;
  pp.b = 0.3;
  pp.validate();
  return pp;
}

// mixtures concentrated near the origin so that dilations by t in [0.1, 10]
// stay inside the computational domain
RadialField narrow_bump_field(const GridPtr& g, Rng& rng) {
  RadialField f(g);
  for (int b = 0; b < 3; ++b) {
    const double c = rng.uniform(0.2, 1.0);
    const double mu = rng.uniform(0.0, 0.4);
    const double s = rng.uniform(0.25, 0.35);
    for (int i = 0; i < g->M; ++i) {
      const double z = (g->r[i] - mu) / s;
      f.v[i] += c * std::exp(-z * z);
    }
  }
  f.v[g->M - 1] = 0.0;
  return f;
}

}  // namespace

TEST_CASE("parameter validation names the violated inequality") {
  ProblemParams pp = subcritical_params();
  CHECK(pp.regime() == Regime::subcritical);

  pp.q = 10.0;  // >= 2* = 6
  CHECK_THROWS_WITH_AS(pp.validate(),
                       "params: violated 'q<2*' in 2<p<2+4/N<q<2*",
                       ConfigError);
  pp = subcritical_params();
  pp.p = 3.5;  // >= 2+4/3
  CHECK_THROWS_AS(pp.validate(), ConfigError);
  pp = subcritical_params();
  pp.alpha = 0.9;
  CHECK_THROWS_AS(pp.validate(), ConfigError);

  ProblemParams crit = subcritical_params();
  crit.alpha = 3.0;
  crit.beta = 3.0;  // r = 6 = 2*
  crit.validate();
  CHECK(crit.regime() == Regime::critical);
  CHECK(crit.gamma_p() < 2.0);
  CHECK(crit.gamma_q() > 2.0);
}

TEST_CASE("energy basics") {
  auto g = make_grid(3, 15.0, 1025);
  ProblemParams pp = subcritical_params();

  SUBCASE("zero pair has zero energy") {
    FieldPair z{RadialField(g), RadialField(g)};
    CHECK(energy(z, pp) == 0.0);
    CHECK(pohozaev(z, pp) == 0.0);
  }

  SUBCASE("energy is additive when the coupling vanishes") {
    Rng rng(3);
    FieldPair pair{random_bump_field(g, rng), random_bump_field(g, rng)};
    ProblemParams p0 = pp;
    p0.nu = 0.0;
    FieldPair uonly{pair.u, RadialField(g)};
    FieldPair vonly{RadialField(g), pair.v};
    CHECK(std::abs(energy(pair, p0) - energy(uonly, p0) - energy(vonly, p0)) <
          1e-12 * (1.0 + std::abs(energy(pair, p0))));
  }
}

TEST_CASE("1-D sech soliton oracle: energy and Pohozaev") {
  // u = sqrt(2) sech solves -u'' + u = u^3, so with mu1 = 1, p = 4:
  // I(u, 0) = 1/2 * 4/3 - 1/4 * 16/3 = -2/3 and P(u, 0) = 0.
  auto g = make_grid(1, 20.0, 32001);
  ProblemParams pp;
  pp.N = 1;
  pp.p = 4.0;
  pp.q = 7.0;
  pp.alpha = 1.5;
  pp.beta = 1.5;
  pp.nu = 0.0;
  pp.a = 4.0;
  pp.b = 1.0;
  pp.validate();

  FieldPair pair{RadialField(g), RadialField(g)};
  for (int i = 0; i < g->M; ++i)
    pair.u.v[i] = std::sqrt(2.0) / std::cosh(g->r[i]);

  CHECK(std::abs(energy(pair, pp) - (-2.0 / 3.0)) < 1e-5);
  CHECK(std::abs(pohozaev(pair, pp)) < 1e-5);
}

TEST_CASE("fiber closed form") {
  auto g = make_grid(3, 15.0, 1025);
  ProblemParams pp = subcritical_params();
  Rng rng(5);
  FieldPair pair{scaled_to_mass(random_bump_field(g, rng), pp.a),
                 scaled_to_mass(random_bump_field(g, rng), pp.b)};
  auto n = pair_norms(pair, pp);

  SUBCASE("Phi(1) equals the energy") {
    CHECK(fiber(n, pp, 1.0).phi == doctest::Approx(energy(n, pp)).epsilon(1e-15));
  }

  SUBCASE("pure q-power pair has its maximum at the closed-form point") {
    PairNorms m{};
    m.K = 2.0;
    m.vq = 0.7;
    const double B = pp.mu2 / pp.q * m.vq;
    const double gq = pp.gamma_q();
    const double t_star = std::pow(m.K / (gq * B), 1.0 / (gq - 2.0));
    const double t_found =
        bisect([&](double t) { return fiber(m, pp, t).dphi; }, 1e-6, 1e6);
    CHECK(std::abs(t_found - t_star) < 1e-8 * t_star);
    CHECK(fiber(m, pp, t_star).d2phi < 0.0);
  }

  SUBCASE("Phi heads to -infinity") { CHECK(fiber(n, pp, 1e3).phi < 0.0); }
}

TEST_CASE("classify identifies the fiber structure") {
  auto g = make_grid(3, 15.0, 8193);
  ProblemParams pp = subcritical_params();
  Rng rng(17);

  SUBCASE("semitrivial (u, 0): one critical point, a minimum") {
    FieldPair pair{scaled_to_mass(random_bump_field(g, rng), pp.a),
                   RadialField(g)};
    auto fa = classify(pair, pp);
    CHECK(fa.s_crit.has_value());
    CHECK_FALSE(fa.t_crit.has_value());
    CHECK(fa.d2_at_s > 0.0);
  }

  SUBCASE("semitrivial (0, v): one critical point, a maximum") {
    FieldPair pair{RadialField(g),
                   scaled_to_mass(random_bump_field(g, rng), pp.b)};
    auto fa = classify(pair, pp);
    CHECK(fa.t_crit.has_value());
    CHECK_FALSE(fa.s_crit.has_value());
    CHECK(fa.d2_at_t < 0.0);
  }

  SUBCASE("small-mass coupled pair: two critical points, min then max") {
    FieldPair pair{scaled_to_mass(random_bump_field(g, rng), pp.a),
                   scaled_to_mass(random_bump_field(g, rng), pp.b)};
    auto fa = classify(pair, pp);
    REQUIRE(fa.s_crit.has_value());
    REQUIRE(fa.t_crit.has_value());
    CHECK(*fa.s_crit < *fa.t_crit);
    CHECK(fa.d2_at_s > 0.0);
    CHECK(fa.d2_at_t < 0.0);
    CHECK(fa.classification == FiberClass::off_manifold);

    // projecting onto a fiber critical point lands on the manifold
    // (tolerance covers the interpolation error of the field dilation)
    auto proj = dilate(*fa.t_crit, pair);
    auto fp = classify(proj, pp, 1e-3);
    CHECK(fp.classification == FiberClass::P_minus);
  }
}

TEST_CASE("fiber/energy and Pohozaev/fiber consistency on random pairs") {
  // t up to 10 squeezes features by 10x, so the direct-evaluation route
  // needs a fine grid to stay within 1e-5 of the closed form
  auto g = make_grid(3, 15.0, 262145);
  ProblemParams pp = subcritical_params();
  Rng rng(20240812);
  for (int trial = 0; trial < 100; ++trial) {
    FieldPair pair{scaled_to_mass(narrow_bump_field(g, rng), pp.a),
                   scaled_to_mass(narrow_bump_field(g, rng), pp.b)};
    auto n = pair_norms(pair, pp);
    const double t = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
    auto fv = fiber(n, pp, t);
    auto dil = dilate(t, pair);
    CHECK(std::abs(energy(dil, pp) - fv.phi) <= 1e-5 * (1.0 + std::abs(fv.phi)));
    CHECK(std::abs(pohozaev(dil, pp) - t * fv.dphi) <=
          1e-5 * (n.K + std::abs(t * fv.dphi)));
  }
}
