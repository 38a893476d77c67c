#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "gpe/util.hpp"

namespace gpe {

enum class Regime { subcritical, critical };

inline const char* regime_name(Regime r) {
  return r == Regime::subcritical ? "subcritical" : "critical";
}

// ---------------------------------------------------------------------------
// Model constants for the coupled system, with derived exponents.
// Valid parameter sets satisfy the mass-mixed chain
//   2 < p < 2 + 4/N < q < 2*,  alpha > 1,  beta > 1,  r = alpha + beta <= 2*,
// with r = 2* (and N in {3,4}) in the critical regime.
// ---------------------------------------------------------------------------
struct ProblemParams {
  int N = 3;
  double p = 3.0;
  double q = 4.0;
  double alpha = 1.5;
  double beta = 1.5;
  double mu1 = 1.0;
  double mu2 = 1.0;
  double nu = 1.0;
  double a = 1.0;  // prescribed mass of u
  double b = 1.0;  // prescribed mass of v

  double gamma(double s) const { return 0.5 * N * (s - 2.0); }
  double gamma_p() const { return gamma(p); }
  double gamma_q() const { return gamma(q); }
  double r() const { return alpha + beta; }
  double gamma_r() const { return gamma(r()); }
  double mass_critical() const { return 2.0 + 4.0 / N; }
  double two_star() const {
    return N >= 3 ? 2.0 * N / (N - 2.0) : std::numeric_limits<double>::infinity();
  }

  bool is_critical() const {
    return N >= 3 && std::abs(r() - two_star()) < 1e-12;
  }
  Regime regime() const {
    return is_critical() ? Regime::critical : Regime::subcritical;
  }

  /// Throws ConfigError naming the violated inequality of the chain
  /// 2 < p < 2+4/N < q < 2*.
  void validate() const {
    const double pbar = mass_critical();
    const double ts = two_star();
    if (N < 1 || N > 4) throw ConfigError("params: N must be in {1,2,3,4}");
    if (!(p > 2.0))
      throw ConfigError("params: violated '2<p' in 2<p<2+4/N<q<2*");
    if (!(p < pbar))
      throw ConfigError("params: violated 'p<2+4/N' in 2<p<2+4/N<q<2*");
    if (!(q > pbar))
      throw ConfigError("params: violated '2+4/N<q' in 2<p<2+4/N<q<2*");
    if (!(q < ts))
      throw ConfigError("params: violated 'q<2*' in 2<p<2+4/N<q<2*");
    if (!(alpha > 1.0)) throw ConfigError("params: alpha must be > 1");
    if (!(beta > 1.0)) throw ConfigError("params: beta must be > 1");
    if (!(r() <= ts + 1e-12))
      throw ConfigError("params: violated 'alpha+beta<=2*'");
    if (is_critical() && !(N == 3 || N == 4))
      throw ConfigError("params: critical coupling needs N in {3,4}");
    if (!(mu1 > 0 && mu2 > 0 && nu >= 0))
      throw ConfigError("params: mu1, mu2 must be positive and nu >= 0");
    if (!(a > 0 && b > 0)) throw ConfigError("params: masses must be positive");
  }
};

}  // namespace gpe
