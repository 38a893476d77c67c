#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "gpe/util.hpp"

namespace gpe {

/// Surface measure of the unit sphere in R^N. N=1 and N=2 use the even /
/// radial symmetrization of the full space (omega_0 = 2, omega_1 = 2*pi).
inline double sphere_surface(int N) {
  switch (N) {
    case 1: return 2.0;
    case 2: return 2.0 * M_PI;
    case 3: return 4.0 * M_PI;
    case 4: return 2.0 * M_PI * M_PI;
    default: throw ConfigError("sphere_surface: N must be in {1,2,3,4}");
  }
}

// ---------------------------------------------------------------------------
// RadialGrid: uniform nodes on [0, L] with quadrature weights encoding
//   integral_0^L f(r) omega_{N-1} r^{N-1} dr.
// Nodal weights integrate quadratics against r^{N-1} exactly per Simpson
// pair; cells where that would produce a negative weight fall back to the
// linear moment rule, which keeps all weights nonnegative. Cell-midpoint
// weights cw carry the exact moment of r^{N-1} over each cell and back the
// staggered gradient form.
// ---------------------------------------------------------------------------
struct RadialGrid {
  int N = 3;
  double L = 40.0;
  int M = 4096;
  double h = 0.0;
  double omega = 0.0;
  std::vector<double> r;   // M nodes
  std::vector<double> w;   // M nodal quadrature weights
  std::vector<double> cw;  // M-1 cell moments omega * int_cell r^{N-1} dr
};

namespace detail {

// integral of r^k over [a, b]
inline double mono_moment(double a, double b, int k) {
  return (std::pow(b, k + 1) - std::pow(a, k + 1)) / (k + 1);
}

// Moments of the linear hat pair on [r0, r1] against r^{N-1}.
inline void linear_cell_weights(double r0, double r1, int N, double& wl,
                                double& wr) {
  const double h = r1 - r0;
  const double m0 = mono_moment(r0, r1, N - 1);
  const double m1 = mono_moment(r0, r1, N);
  wl = (r1 * m0 - m1) / h;
  wr = (m1 - r0 * m0) / h;
}

// Moments of the quadratic Lagrange basis on [r0, r2] (nodes r0, r1, r2)
// against r^{N-1}. Returns false unless all three weights are strictly
// positive (the N = 2 origin pair yields an exact zero, which would break
// the weighted operators downstream).
inline bool quadratic_pair_weights(double r0, double r1, double r2, int N,
                                   double out[3]) {
  const double m0 = mono_moment(r0, r2, N - 1);
  const double m1 = mono_moment(r0, r2, N);
  const double m2 = mono_moment(r0, r2, N + 1);
  const double nodes[3] = {r0, r1, r2};
  for (int i = 0; i < 3; ++i) {
    const double xi = nodes[i];
    const double xj = nodes[(i + 1) % 3];
    const double xk = nodes[(i + 2) % 3];
    const double denom = (xi - xj) * (xi - xk);
    out[i] = (m2 - (xj + xk) * m1 + xj * xk * m0) / denom;
    if (!(out[i] > 0.0)) return false;
  }
  return true;
}

}  // namespace detail

inline std::shared_ptr<const RadialGrid> make_grid(int N, double L, int M) {
  if (N < 1 || N > 4) throw ConfigError("make_grid: N must be in {1,2,3,4}");
  if (!(L > 0.0)) throw ConfigError("make_grid: L must be positive");
  if (M < 64) throw ConfigError("make_grid: M must be >= 64");

  auto g = std::make_shared<RadialGrid>();
  g->N = N;
  g->L = L;
  g->M = M;
  g->h = L / (M - 1);
  g->omega = sphere_surface(N);
  g->r.resize(M);
  g->w.assign(M, 0.0);
  g->cw.resize(M - 1);
  for (int i = 0; i < M; ++i) g->r[i] = i * g->h;
  g->r[M - 1] = L;

  int i = 0;
  while (i + 2 <= M - 1) {
    double wq[3];
    if (detail::quadratic_pair_weights(g->r[i], g->r[i + 1], g->r[i + 2], N,
                                       wq)) {
      g->w[i] += wq[0];
      g->w[i + 1] += wq[1];
      g->w[i + 2] += wq[2];
    } else {
      double wl, wr;
      detail::linear_cell_weights(g->r[i], g->r[i + 1], N, wl, wr);
      g->w[i] += wl;
      g->w[i + 1] += wr;
      detail::linear_cell_weights(g->r[i + 1], g->r[i + 2], N, wl, wr);
      g->w[i + 1] += wl;
      g->w[i + 2] += wr;
    }
    i += 2;
  }
  if (i == M - 2) {  // one trailing cell
    double wl, wr;
    detail::linear_cell_weights(g->r[i], g->r[i + 1], N, wl, wr);
    g->w[i] += wl;
    g->w[i + 1] += wr;
  }
  for (auto& wi : g->w) wi *= g->omega;
  for (int c = 0; c < M - 1; ++c)
    g->cw[c] = g->omega * detail::mono_moment(g->r[c], g->r[c + 1], N - 1);
  return g;
}

using GridPtr = std::shared_ptr<const RadialGrid>;

// ---------------------------------------------------------------------------
// RadialField: a radially symmetric real function sampled on a grid.
// ---------------------------------------------------------------------------
struct RadialField {
  GridPtr grid;
  std::vector<double> v;

  RadialField() = default;
  explicit RadialField(GridPtr g) : grid(std::move(g)), v(grid->M, 0.0) {}
  RadialField(GridPtr g, std::vector<double> vals)
      : grid(std::move(g)), v(std::move(vals)) {}

  int size() const { return grid->M; }
  double max_abs() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
};

struct FieldPair {
  RadialField u;
  RadialField v;
};

inline void check_same_grid(const RadialField& a, const RadialField& b) {
  if (a.grid.get() != b.grid.get())
    throw ConfigError("fields must share a grid");
}

// ---------------------------------------------------------------------------
// Quadrature and norms
// ---------------------------------------------------------------------------

inline double integrate(const RadialField& f) {
  double s = 0.0;
  for (int i = 0; i < f.size(); ++i) s += f.grid->w[i] * f.v[i];
  return s;
}

template <class F>
double integrate(const GridPtr& g, F&& fn) {
  double s = 0.0;
  for (int i = 0; i < g->M; ++i) s += g->w[i] * fn(i);
  return s;
}

/// ||f||_s^s for s >= 1.
inline double lp_norm_pow(const RadialField& f, double s) {
  if (s < 1.0) throw ConfigError("lp_norm_pow: exponent must be >= 1");
  double acc = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    const double x = std::abs(f.v[i]);
    if (!std::isfinite(x)) throw SolverError("lp_norm_pow: non-finite value");
    if (x > 0.0) acc += f.grid->w[i] * std::pow(x, s);
  }
  return acc;
}

inline double mass(const RadialField& f) {
  double acc = 0.0;
  for (int i = 0; i < f.size(); ++i) acc += f.grid->w[i] * f.v[i] * f.v[i];
  return acc;
}

/// ||grad f||_2^2 from staggered midpoint differences. Natural (no-flux)
/// behaviour at the origin, Dirichlet truncation at r = L; second order.
inline double grad_norm_sq(const RadialField& f) {
  const auto& g = *f.grid;
  double acc = 0.0;
  for (int c = 0; c < g.M - 1; ++c) {
    const double d = (f.v[c + 1] - f.v[c]) / g.h;
    if (!std::isfinite(d)) throw SolverError("grad_norm_sq: non-finite value");
    acc += g.cw[c] * d * d;
  }
  return acc;
}

inline double inner(const RadialField& a, const RadialField& b) {
  check_same_grid(a, b);
  double acc = 0.0;
  for (int i = 0; i < a.size(); ++i) acc += a.grid->w[i] * a.v[i] * b.v[i];
  return acc;
}

inline double grad_inner(const RadialField& a, const RadialField& b) {
  check_same_grid(a, b);
  const auto& g = *a.grid;
  double acc = 0.0;
  for (int c = 0; c < g.M - 1; ++c) {
    const double da = (a.v[c + 1] - a.v[c]) / g.h;
    const double db = (b.v[c + 1] - b.v[c]) / g.h;
    acc += g.cw[c] * da * db;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Cubic interpolation (4-point Lagrange on the uniform grid, clamped stencils
// at the ends, zero beyond L, even extension through the origin).
// ---------------------------------------------------------------------------
inline double interp_cubic(const RadialField& f, double x) {
  const auto& g = *f.grid;
  if (x < 0.0) x = -x;
  if (x >= g.L) return 0.0;
  const int M = g.M;
  int i = static_cast<int>(x / g.h);
  i = std::clamp(i, 0, M - 2);
  const int j0 = std::clamp(i - 1, 0, M - 4);
  const double t = (x - g.r[j0]) / g.h;
  const double w0 = -(t - 1) * (t - 2) * (t - 3) / 6.0;
  const double w1 = t * (t - 2) * (t - 3) / 2.0;
  const double w2 = -t * (t - 1) * (t - 3) / 2.0;
  const double w3 = t * (t - 1) * (t - 2) / 6.0;
  return w0 * f.v[j0] + w1 * f.v[j0 + 1] + w2 * f.v[j0 + 2] + w3 * f.v[j0 + 3];
}

// ---------------------------------------------------------------------------
// Mass-preserving dilation (t * f)(r) = t^{N/2} f(t r).
// ---------------------------------------------------------------------------
struct DilationReport {
  double tail_fraction = 0.0;  // max |f| on the support pushed past L,
                               // relative to max |f|
  bool tail_warning = false;
};

inline RadialField dilate(double t, const RadialField& f,
                          DilationReport* report = nullptr) {
  if (!(t > 0.0)) throw ConfigError("dilate: t must be positive");
  const auto& g = *f.grid;
  RadialField out(f.grid);
  const double amp = std::pow(t, 0.5 * g.N);
  for (int i = 0; i < g.M; ++i) out.v[i] = amp * interp_cubic(f, t * g.r[i]);
  if (report) {
    report->tail_fraction = 0.0;
    report->tail_warning = false;
    if (t < 1.0) {
      const double fmax = f.max_abs();
      double tail = 0.0;
      for (int i = 0; i < g.M; ++i)
        if (g.r[i] >= t * g.L) tail = std::max(tail, std::abs(f.v[i]));
      report->tail_fraction = fmax > 0 ? tail / fmax : 0.0;
      report->tail_warning = report->tail_fraction > 1e-8;
    }
  }
  return out;
}

inline FieldPair dilate(double t, const FieldPair& p) {
  return {dilate(t, p.u), dilate(t, p.v)};
}

inline RadialField resample(const RadialField& f, const GridPtr& g2) {
  if (f.grid->N != g2->N) throw ConfigError("resample: dimension mismatch");
  RadialField out(g2);
  for (int i = 0; i < g2->M; ++i) out.v[i] = interp_cubic(f, g2->r[i]);
  return out;
}

/// Rescale to an exact L^2 mass. Zero fields cannot carry mass.
inline RadialField scaled_to_mass(const RadialField& f, double m_target) {
  const double m = mass(f);
  if (m <= 0.0) throw SolverError("scaled_to_mass: zero field");
  RadialField out = f;
  const double c = std::sqrt(m_target / m);
  for (auto& x : out.v) x *= c;
  return out;
}

/// Positive random field: a mixture of radial gaussian bumps.
inline RadialField random_bump_field(const GridPtr& g, Rng& rng,
                                     int n_bumps = 3) {
  RadialField f(g);
  for (int b = 0; b < n_bumps; ++b) {
    const double c = rng.uniform(0.2, 1.0);
    const double mu = rng.uniform(0.0, 0.25 * g->L);
    const double s = rng.uniform(0.5, 2.0);
    for (int i = 0; i < g->M; ++i) {
      const double z = (g->r[i] - mu) / s;
      f.v[i] += c * std::exp(-z * z);
    }
  }
  f.v[g->M - 1] = 0.0;
  return f;
}

// ---------------------------------------------------------------------------
// Discrete radial operators on the interior unknowns 0..M-2 (the node at L
// is held at zero). K is the exact gradient of the quadratic form behind
// grad_norm_sq, so descent, multipliers and reported energies agree.
// ---------------------------------------------------------------------------

/// Tridiagonal stiffness: u^T K u == grad_norm_sq(u) when u(L) = 0.
inline BandedMatrix stiffness_matrix(const GridPtr& g) {
  const int M = g->M;
  const int n = M - 1;
  const double h2 = g->h * g->h;
  BandedMatrix K(n, 1);
  for (int c = 0; c < M - 1; ++c) {
    const double k = g->cw[c] / h2;
    if (c < n) K.at(c, c) += k;
    if (c + 1 < n) {
      K.at(c + 1, c + 1) += k;
      K.at(c, c + 1) -= k;
      K.at(c + 1, c) -= k;
    }
  }
  return K;
}

/// y = (-Lap) f in the weighted sense: y_i = (K f)_i / w_i, with f(L) = 0.
inline std::vector<double> neg_laplacian(const RadialField& f) {
  const auto& g = *f.grid;
  const int M = g.M;
  std::vector<double> y(M, 0.0);
  const double h2 = g.h * g.h;
  for (int i = 0; i < M - 1; ++i) {
    double s = 0.0;
    if (i > 0) s += g.cw[i - 1] * (f.v[i] - f.v[i - 1]);
    s += g.cw[i] * (f.v[i] - f.v[i + 1]);
    y[i] = s / (h2 * g.w[i]);
  }
  y[M - 1] = 0.0;
  return y;
}

/// Factorized solver for (sigma*W + K) x = W b  (i.e. (-Lap + sigma) x = b).
class HelmholtzSolve {
 public:
  HelmholtzSolve(const GridPtr& g, double sigma)
      : grid_(g), n_(g->M - 1), lu_(build(g, sigma)) {}

  RadialField operator()(const RadialField& b) const {
    std::vector<double> rhs(n_);
    for (int i = 0; i < n_; ++i) rhs[i] = grid_->w[i] * b.v[i];
    lu_.solve(rhs);
    rhs.push_back(0.0);
    return RadialField(b.grid, std::move(rhs));
  }

 private:
  static BandedLU build(const GridPtr& g, double sigma) {
    BandedMatrix A = stiffness_matrix(g);
    for (int i = 0; i < g->M - 1; ++i) A.at(i, i) += sigma * g->w[i];
    return BandedLU(A);
  }
  GridPtr grid_;
  int n_;
  BandedLU lu_;
};

}  // namespace gpe
