#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gpe {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// A result that contradicts the structural guarantees of the problem
// (e.g. more fiber critical points than the geometry admits).
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Deterministic random stream (xoshiro256**, splitmix64 seeding).
// Streams are splittable so parallel sweeps stay reproducible.
// ---------------------------------------------------------------------------
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& si : s_) si = splitmix64(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform in [0,1)
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  Rng split() { return Rng(next_u64() ^ 0x9e3779b97f4a7c15ULL); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::array<std::uint64_t, 4> s_{};
};

// ---------------------------------------------------------------------------
// Scalar root finding / optimization
// ---------------------------------------------------------------------------

// Bisection on [lo, hi]; requires a sign change. Tolerance is relative to the
// bracket midpoint magnitude (absolute fallback near zero).
inline double bisect(const std::function<double(double)>& f, double lo,
                     double hi, double rel_tol = 1e-14, int max_iter = 200) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0))
    throw SolverError("bisect: no sign change in bracket");
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo <= rel_tol * (std::abs(lo) + std::abs(hi)) * 0.5 + 1e-300)
      break;
  }
  return 0.5 * (lo + hi);
}

// Bisection in log-space for positive roots spanning many decades.
inline double bisect_log(const std::function<double(double)>& f, double lo,
                         double hi, double rel_tol = 1e-14,
                         int max_iter = 400) {
  auto g = [&](double x) { return f(std::exp(x)); };
  return std::exp(bisect(g, std::log(lo), std::log(hi), rel_tol, max_iter));
}

// Golden-section maximization on [lo, hi] for unimodal f.
inline double golden_max(const std::function<double(double)>& f, double lo,
                         double hi, double tol = 1e-12) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - gr * (hi - lo);
  double d = lo + gr * (hi - lo);
  double fc = f(c), fd = f(d);
  while (hi - lo > tol * (1.0 + std::abs(lo) + std::abs(hi))) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - gr * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + gr * (hi - lo);
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Banded linear algebra (half-bandwidth <= kb, no pivoting).
// Sufficient for the diagonally dominant radial operators used here.
// ---------------------------------------------------------------------------
class BandedMatrix {
 public:
  BandedMatrix(int n, int kb) : n_(n), kb_(kb), a_(n * (2 * kb + 1), 0.0) {}

  double& at(int i, int j) { return a_[i * (2 * kb_ + 1) + (j - i + kb_)]; }
  double get(int i, int j) const {
    if (j < i - kb_ || j > i + kb_ || j < 0 || j >= n_) return 0.0;
    return a_[i * (2 * kb_ + 1) + (j - i + kb_)];
  }
  int size() const { return n_; }
  int bandwidth() const { return kb_; }

  void apply(const double* x, double* y) const {
    for (int i = 0; i < n_; ++i) {
      double s = 0.0;
      const int j0 = std::max(0, i - kb_), j1 = std::min(n_ - 1, i + kb_);
      for (int j = j0; j <= j1; ++j) s += get(i, j) * x[j];
      y[i] = s;
    }
  }

 private:
  int n_, kb_;
  std::vector<double> a_;
};

// LU factorization of a banded matrix without pivoting; fill stays in band.
class BandedLU {
 public:
  explicit BandedLU(const BandedMatrix& m)
      : n_(m.size()), kb_(m.bandwidth()), lu_(m) {
    for (int k = 0; k < n_ - 1; ++k) {
      const double piv = lu_.at(k, k);
      if (std::abs(piv) < 1e-300)
        throw SolverError("BandedLU: zero pivot");
      const int imax = std::min(n_ - 1, k + kb_);
      for (int i = k + 1; i <= imax; ++i) {
        const double f = lu_.at(i, k) / piv;
        lu_.at(i, k) = f;
        const int jmax = std::min(n_ - 1, k + kb_);
        for (int j = k + 1; j <= jmax; ++j)
          lu_.at(i, j) -= f * lu_.at(k, j);
      }
    }
  }

  void solve(std::vector<double>& b) const {
    for (int k = 0; k < n_ - 1; ++k) {
      const int imax = std::min(n_ - 1, k + kb_);
      for (int i = k + 1; i <= imax; ++i) b[i] -= lu_.get(i, k) * b[k];
    }
    for (int i = n_ - 1; i >= 0; --i) {
      const int jmax = std::min(n_ - 1, i + kb_);
      double s = b[i];
      for (int j = i + 1; j <= jmax; ++j) s -= lu_.get(i, j) * b[j];
      b[i] = s / lu_.get(i, i);
    }
  }

 private:
  int n_, kb_;
  BandedMatrix lu_;
};

// ---------------------------------------------------------------------------
// Least-squares line fit, used for asymptotic rate estimation.
// Returns (slope, intercept).
// ---------------------------------------------------------------------------
inline std::pair<double, double> line_fit(const std::vector<double>& x,
                                          const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ConfigError("line_fit: need >= 2 points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / denom;
  return {slope, (sy - slope * sx) / n};
}

// ---------------------------------------------------------------------------
// SHA-1, used for content hashes in run manifests.
// ---------------------------------------------------------------------------
inline std::string sha1_hex(const std::string& data) {
  auto rotl32 = [](std::uint32_t x, int k) {
    return (x << k) | (x >> (32 - k));
  };
  std::uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u,
                        0xC3D2E1F0u};
  std::string msg = data;
  const std::uint64_t bitlen = static_cast<std::uint64_t>(msg.size()) * 8;
  msg.push_back(static_cast<char>(0x80));
  while (msg.size() % 64 != 56) msg.push_back('\0');
  for (int i = 7; i >= 0; --i)
    msg.push_back(static_cast<char>((bitlen >> (8 * i)) & 0xff));
  for (std::size_t off = 0; off < msg.size(); off += 64) {
    std::uint32_t w[80];
    for (int i = 0; i < 16; ++i) {
      w[i] = (static_cast<std::uint8_t>(msg[off + 4 * i]) << 24) |
             (static_cast<std::uint8_t>(msg[off + 4 * i + 1]) << 16) |
             (static_cast<std::uint8_t>(msg[off + 4 * i + 2]) << 8) |
             static_cast<std::uint8_t>(msg[off + 4 * i + 3]);
    }
    for (int i = 16; i < 80; ++i)
      w[i] = rotl32(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
    for (int i = 0; i < 80; ++i) {
      std::uint32_t f, k;
      if (i < 20) {
        f = (b & c) | (~b & d);
        k = 0x5A827999u;
      } else if (i < 40) {
        f = b ^ c ^ d;
        k = 0x6ED9EBA1u;
      } else if (i < 60) {
        f = (b & c) | (b & d) | (c & d);
        k = 0x8F1BBCDCu;
      } else {
        f = b ^ c ^ d;
        k = 0xCA62C1D6u;
      }
      const std::uint32_t tmp = rotl32(a, 5) + f + e + k + w[i];
      e = d;
      d = c;
      c = rotl32(b, 30);
      b = a;
      a = tmp;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
    h[4] += e;
  }
  char buf[41];
  std::snprintf(buf, sizeof(buf), "%08x%08x%08x%08x%08x", h[0], h[1], h[2],
                h[3], h[4]);
  return std::string(buf);
}

// 17 significant digits: enough to round-trip a double exactly.
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

}  // namespace gpe
