#pragma once

// Reference computations that share no code with the library.  Tests compare
// the library against these and against values frozen from them.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "corrdyn/random.hpp"
#include "corrdyn/sphere.hpp"

namespace oracle {

using cplx = std::complex<double>;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Chordal distance from the closed formula; kInf stands for the point at
// infinity.
inline double chordal(cplx z, cplx w) {
  const bool zi = std::isinf(z.real());
  const bool wi = std::isinf(w.real());
  if (zi && wi) return 0.0;
  if (zi) return 2.0 / std::sqrt(1.0 + std::norm(w));
  if (wi) return 2.0 / std::sqrt(1.0 + std::norm(z));
  return 2.0 * std::abs(z - w) / std::sqrt((1.0 + std::norm(z)) * (1.0 + std::norm(w)));
}

inline cplx horner(const std::vector<cplx>& c, cplx z) {
  cplx v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * z + *it;
  return v;
}

// Coefficient table t[i][j] of z^i w^j in (p(z) q(w) - p(w) q(z)) / (z - w),
// from the expansion (z^i w^j - z^j w^i)/(z - w) = z^j w^j h_{i-j-1}(z, w)
// for i > j, where h_m is the complete homogeneous polynomial of degree m.
inline std::vector<std::vector<cplx>> deleted_covering_table(std::vector<cplx> p, std::vector<cplx> q) {
  const std::size_t d = std::max(p.size(), q.size()) - 1;
  p.resize(d + 1);
  q.resize(d + 1);
  std::vector<std::vector<cplx>> t(d, std::vector<cplx>(d, 0.0));
  for (std::size_t i = 0; i <= d; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const cplx n = p[i] * q[j] - p[j] * q[i];
      for (std::size_t k = 0; k + j + 1 <= i; ++k) t[j + k][i - 1 - k] += n;
    }
  return t;
}

// Durand-Kerner iteration; adequate for the well separated roots used in tests.
inline std::vector<cplx> durand_kerner(std::vector<cplx> c) {
  const std::size_t n = c.size() - 1;
  for (auto& x : c) x /= c.back();
  std::vector<cplx> r(n);
  for (std::size_t k = 0; k < n; ++k) r[k] = std::pow(cplx(0.4, 0.9), static_cast<double>(k));
  for (int it = 0; it < 2000; ++it) {
    double move = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      cplx den = 1.0;
      for (std::size_t m = 0; m < n; ++m)
        if (m != k) den *= r[k] - r[m];
      const cplx step = horner(c, r[k]) / den;
      r[k] -= step;
      move = std::max(move, std::abs(step));
    }
    if (move < 1e-15) break;
  }
  return r;
}

// Minimal chordal distance from z to a set.
inline double distance_to_set(cplx z, const std::vector<cplx>& set) {
  double best = kInf;
  for (const cplx& s : set) best = std::min(best, chordal(z, s));
  return best;
}

// Brute-force checks for a greedy separated subset: every accepted pair is
// separated and every orbit is within eps of some accepted orbit.
struct SeparationAudit {
  bool separated = true;
  bool maximal = true;
};

template <class Tuple, class Dist>
SeparationAudit audit_separated(const std::vector<Tuple>& all, const std::vector<std::size_t>& accepted, double eps,
                                Dist bowen) {
  SeparationAudit a;
  for (std::size_t x = 0; x < accepted.size(); ++x)
    for (std::size_t y = x + 1; y < accepted.size(); ++y)
      if (bowen(all[accepted[x]], all[accepted[y]]) < eps) a.separated = false;
  for (const auto& t : all) {
    bool covered = false;
    for (std::size_t k : accepted) covered = covered || bowen(t, all[k]) < eps;
    if (!covered) a.maximal = false;
  }
  return a;
}

inline cplx random_complex(corrdyn::SplitMix64& rng, double radius) {
  return std::polar(radius * std::sqrt(rng.uniform()), 2.0 * std::numbers::pi * rng.uniform());
}

}  // namespace oracle
