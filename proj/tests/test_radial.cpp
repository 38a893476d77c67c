#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gpe/radial.hpp"

using namespace gpe;

namespace {
double rel_err(double got, double expect) {
  return std::abs(got - expect) / std::abs(expect);
}
}  // namespace

TEST_CASE("grid volume checks") {
  // integral of 1 over the N-ball of radius L
  auto g1 = make_grid(1, 20.0, 2001);
  double vol1 = 0;
  for (double w : g1->w) vol1 += w;
  CHECK(rel_err(vol1, 40.0) < 1e-10);

  auto g3 = make_grid(3, 10.0, 1024);
  double vol3 = 0;
  for (double w : g3->w) vol3 += w;
  CHECK(rel_err(vol3, 4.0 / 3.0 * M_PI * 1e3) < 1e-10);

  auto g4 = make_grid(4, 10.0, 1024);
  double vol4 = 0;
  for (double w : g4->w) vol4 += w;
  CHECK(rel_err(vol4, 0.5 * M_PI * M_PI * 1e4) < 1e-10);
}

TEST_CASE("grid validation and invariants") {
  CHECK_THROWS_AS(make_grid(5, 10.0, 1024), ConfigError);
  CHECK_THROWS_AS(make_grid(0, 10.0, 1024), ConfigError);
  CHECK_THROWS_AS(make_grid(3, -1.0, 1024), ConfigError);
  CHECK_THROWS_AS(make_grid(3, 10.0, 32), ConfigError);

  for (int N : {1, 2, 3, 4}) {
    auto g = make_grid(N, 15.0, 1025);
    for (double w : g->w) CHECK(w >= 0.0);
    for (int i = 1; i < g->M; ++i) CHECK(g->r[i] > g->r[i - 1]);
    CHECK(g->r[0] == 0.0);
    CHECK(g->r[g->M - 1] == doctest::Approx(15.0));
  }
}

TEST_CASE("quadrature integrates quadratics against r^{N-1} exactly enough") {
  for (int N : {1, 2, 3, 4}) {
    auto g = make_grid(N, 12.0, 1024);
    const double L = g->L;
    // f = 1 + 2r + 3r^2
    RadialField f(g);
    for (int i = 0; i < g->M; ++i)
      f.v[i] = 1.0 + 2.0 * g->r[i] + 3.0 * g->r[i] * g->r[i];
    const double got = integrate(f);
    const double expect =
        g->omega * (std::pow(L, N) / N + 2.0 * std::pow(L, N + 1) / (N + 1) +
                    3.0 * std::pow(L, N + 2) / (N + 2));
    CHECK(rel_err(got, expect) < 1e-8);
  }
}

TEST_CASE("sech norms on the symmetrized line") {
  // f = sqrt(2) sech(r), exact values from closed-form integrals:
  // int_R sech^2 = 2, int_R sech^2 tanh^2 = 2/3, int_R sech^4 = 4/3
  auto g = make_grid(1, 20.0, 32001);
  RadialField f(g);
  for (int i = 0; i < g->M; ++i)
    f.v[i] = std::sqrt(2.0) / std::cosh(g->r[i]);

  CHECK(std::abs(mass(f) - 4.0) < 1e-6);
  CHECK(std::abs(grad_norm_sq(f) - 4.0 / 3.0) < 1e-5);
  CHECK(std::abs(lp_norm_pow(f, 4.0) - 16.0 / 3.0) < 1e-5);
  CHECK_THROWS_AS(lp_norm_pow(f, 0.5), ConfigError);
}

TEST_CASE("dilation identity, mass preservation and scaling laws") {
  auto g = make_grid(3, 15.0, 8193);
  RadialField f(g);
  for (int i = 0; i < g->M; ++i)
    f.v[i] = std::exp(-g->r[i] * g->r[i]) +
             0.5 * std::exp(-2.0 * (g->r[i] - 1.0) * (g->r[i] - 1.0));
  f.v[g->M - 1] = 0.0;

  SUBCASE("t = 1 is the identity") {
    auto out = dilate(1.0, f);
    for (int i = 0; i < g->M; ++i)
      CHECK(out.v[i] == doctest::Approx(f.v[i]).epsilon(1e-12));
  }

  SUBCASE("scaling identities") {
    const double m0 = mass(f);
    const double k0 = grad_norm_sq(f);
    const double p = 3.5;
    const double gamma_p = 0.5 * g->N * (p - 2.0);
    const double pn0 = lp_norm_pow(f, p);
    for (double t : {0.7, 1.3, 2.0}) {
      auto out = dilate(t, f);
      CHECK(rel_err(mass(out), m0) < 1e-6);
      CHECK(rel_err(grad_norm_sq(out), t * t * k0) < 1e-5);
      CHECK(rel_err(lp_norm_pow(out, p), std::pow(t, gamma_p) * pn0) < 1e-5);
    }
  }

  SUBCASE("group law") {
    auto ab = dilate(0.8, dilate(1.6, f));
    auto c = dilate(0.8 * 1.6, f);
    const double fmax = f.max_abs();
    for (int i = 0; i < g->M; ++i)
      CHECK(std::abs(ab.v[i] - c.v[i]) < 1e-5 * fmax);
  }

  SUBCASE("tail warning when t < 1 pushes support past L") {
    RadialField wide(g);
    for (int i = 0; i < g->M; ++i)
      wide.v[i] = 1.0 / (1.0 + g->r[i]);  // slow decay
    DilationReport rep;
    dilate(0.4, wide, &rep);
    CHECK(rep.tail_warning);
    DilationReport rep2;
    dilate(0.9, f, &rep2);  // gaussian: decayed long before L
    CHECK_FALSE(rep2.tail_warning);
  }
}

TEST_CASE("scaling identities hold for random gaussian mixtures") {
  auto g = make_grid(3, 15.0, 8193);
  Rng rng(20240811);
  const double p = 3.0;
  const double gamma_p = 0.5 * g->N * (p - 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    RadialField f = random_bump_field(g, rng);
    // keep t*L inside the decayed tail of the mixture (dilate precondition)
    const double t = rng.uniform(0.8, 2.0);
    auto out = dilate(t, f);
    CHECK(rel_err(mass(out), mass(f)) < 1e-6);
    CHECK(rel_err(grad_norm_sq(out), t * t * grad_norm_sq(f)) < 1e-5);
    CHECK(rel_err(lp_norm_pow(out, p), std::pow(t, gamma_p) * lp_norm_pow(f, p)) <
          1e-5);
  }
}

TEST_CASE("resample") {
  auto g = make_grid(3, 10.0, 1025);
  RadialField f(g);
  for (int i = 0; i < g->M; ++i) f.v[i] = std::exp(-g->r[i] * g->r[i]);

  SUBCASE("identity on the same node set") {
    auto out = resample(f, g);
    for (int i = 0; i < g->M; ++i)
      CHECK(out.v[i] == doctest::Approx(f.v[i]).epsilon(1e-13));
  }

  SUBCASE("refine then coarsen returns the smooth field") {
    auto fine = make_grid(3, 10.0, 2049);
    auto back = resample(resample(f, fine), g);
    const double fmax = f.max_abs();
    for (int i = 0; i < g->M; ++i)
      CHECK(std::abs(back.v[i] - f.v[i]) <= 1e-6 * fmax);
  }

  SUBCASE("resample to a larger domain preserves the L2 norm") {
    auto big = make_grid(3, 14.0, 2049);
    auto out = resample(f, big);
    CHECK(rel_err(mass(out), mass(f)) < 1e-8);
  }

  SUBCASE("dimension mismatch rejected") {
    auto g2 = make_grid(2, 10.0, 1025);
    CHECK_THROWS_AS(resample(f, g2), ConfigError);
  }
}

TEST_CASE("stiffness matrix matches the gradient quadratic form") {
  auto g = make_grid(3, 8.0, 257);
  Rng rng(7);
  RadialField f = random_bump_field(g, rng);
  f.v[g->M - 1] = 0.0;
  BandedMatrix K = stiffness_matrix(g);
  std::vector<double> x(f.v.begin(), f.v.end() - 1), y(g->M - 1);
  K.apply(x.data(), y.data());
  double quad = 0.0;
  for (int i = 0; i < g->M - 1; ++i) quad += x[i] * y[i];
  CHECK(rel_err(quad, grad_norm_sq(f)) < 1e-12);
}

TEST_CASE("helmholtz solve inverts the discrete operator") {
  auto g = make_grid(3, 8.0, 513);
  Rng rng(11);
  RadialField b = random_bump_field(g, rng);
  b.v[g->M - 1] = 0.0;
  HelmholtzSolve solve(g, 2.5);
  auto x = solve(b);
  auto lap = neg_laplacian(x);
  for (int i = 0; i < g->M - 1; ++i)
    CHECK(std::abs(lap[i] + 2.5 * x.v[i] - b.v[i]) < 1e-9 * (1.0 + b.max_abs()));
}
