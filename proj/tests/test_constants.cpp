#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gpe/constants.hpp"

using namespace gpe;

TEST_CASE("sobolev constant") {
  SUBCASE("rejects N <= 2") {
    CHECK_THROWS_AS(sobolev_constant(2), ConfigError);
  }

  SUBCASE("matches the closed form S_N = N(N-2) pi (Gamma(N/2)/Gamma(N))^{2/N}") {
    // independent oracle from the classical extremal-value formula
    auto closed = [](int N) {
      return N * (N - 2.0) * M_PI *
             std::pow(std::tgamma(N / 2.0) / std::tgamma(double(N)), 2.0 / N);
    };
    CHECK(std::abs(sobolev_constant(3) - closed(3)) < 1e-7 * closed(3));
    CHECK(std::abs(sobolev_constant(4) - closed(4)) < 1e-7 * closed(4));
  }

  SUBCASE("quotient is invariant under dilation of the extremal profile") {
    for (int N : {3, 4}) {
      const double S = sobolev_constant(N);
      for (double t : {0.5, 2.0})
        CHECK(std::abs(sobolev_constant(N, t) - S) < 1e-5 * S);
    }
  }

  SUBCASE("raw truncated quadrature carries the O(1/L) bias the tails fix") {
    const double S = sobolev_constant(3);
    auto g = make_grid(3, 80.0, 32769);
    RadialField W(g);
    for (int i = 0; i < g->M; ++i)
      W.v[i] = std::pow(1.0 + g->r[i] * g->r[i], -0.5);
    const double q1 =
        grad_norm_sq(W) / std::pow(lp_norm_pow(W, 6.0), 1.0 / 3.0);
    CHECK(std::abs(q1 - S) < 0.03 * S);
    CHECK(std::abs(q1 - S) > 1e-3 * S);
  }

  SUBCASE("random radial fields satisfy the Sobolev inequality") {
    const double S = sobolev_constant(3);
    auto g = make_grid(3, 20.0, 2049);
    Rng rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
      RadialField f = random_bump_field(g, rng);
      CHECK(grad_norm_sq(f) >=
            S * std::pow(lp_norm_pow(f, 6.0), 1.0 / 3.0) - 1e-8);
    }
  }
}

TEST_CASE("gagliardo-nirenberg constant") {
  SUBCASE("s = 2 degenerates to the identity") {
    ConstantsTable tab;
    CHECK(tab.gn(3, 2.0) == 1.0);
  }

  SUBCASE("s = 2* reduces to the Sobolev inequality (N = 3)") {
    ConstantsTable tab;
    const double S = tab.sobolev(3);
    CHECK(std::abs(tab.gn(3, 6.0) - std::pow(S, -3.0)) < 1e-4 * std::pow(S, -3.0));
  }

  SUBCASE("N = 1, s = 4: the maximizer is the sech soliton") {
    auto g = make_grid(1, 20.0, 8193);
    auto c = gn_constant_computation(1, 4.0, g);
    // quotient at the exact soliton sqrt(2) sech: gamma_4 = 1,
    // ||f||_4^4 = 16/3, ||grad f||_2 = sqrt(4/3), ||f||_2^3 = 8
    const double exact = (16.0 / 3.0) / (std::sqrt(4.0 / 3.0) * 8.0);
    CHECK(std::abs(c.via_soliton - exact) < 1e-5 * exact);
    CHECK(std::abs(c.value - exact) < 1e-4 * exact);
  }

  SUBCASE("no random field violates the inequality with the computed constant") {
    auto g = make_grid(3, 20.0, 2049);
    auto c = gn_constant_computation(3, 3.0, g);
    const double gs = 1.5;  // N(s-2)/2 for N=3, s=3
    Rng rng(77);
    for (int trial = 0; trial < 40; ++trial) {
      RadialField f = random_bump_field(g, rng);
      const double lhs = lp_norm_pow(f, 3.0);
      const double rhs = c.value * std::pow(grad_norm_sq(f), 0.5 * gs) *
                         std::pow(mass(f), 0.5 * (3.0 - gs));
      CHECK(lhs <= rhs + 1e-8);
    }
  }

  SUBCASE("table caches and reproduces entries") {
    ConstantsTable tab(4097, 20.0);
    const double v1 = tab.gn(3, 3.0);
    const double v2 = tab.gn(3, 3.0);
    CHECK(v1 == v2);
    CHECK(tab.entries().size() == 1);
    // recomputation from scratch reproduces the cached value
    ConstantsTable tab2(4097, 20.0);
    CHECK(std::abs(tab2.gn(3, 3.0) - v1) < 1e-6 * v1);
  }
}

TEST_CASE("grid refinement stability of the sobolev quotient") {
  // evaluate the truncated quotient on M and 2M point grids
  for (int N : {3, 4}) {
    auto q_at = [&](int M) {
      auto g = make_grid(N, 40.0, M);
      RadialField W(g);
      for (int i = 0; i < g->M; ++i)
        W.v[i] = std::pow(1.0 + g->r[i] * g->r[i], -0.5 * (N - 2));
      const double two_star = 2.0 * N / (N - 2.0);
      return grad_norm_sq(W) /
             std::pow(lp_norm_pow(W, two_star), 2.0 / two_star);
    };
    const double qa = q_at(8193), qb = q_at(16385);
    CHECK(std::abs(qa - qb) < 1e-5 * qb);
  }
}
