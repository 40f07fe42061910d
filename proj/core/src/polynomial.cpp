#include "corrdyn/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>

#include "corrdyn/error.hpp"

namespace corrdyn {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// p(z) / p'(z) evaluated in whichever chart is numerically safe.
// Returns false when p'(z) vanishes.
bool newton_ratio(std::span<const cplx> a, cplx z, cplx& ratio, double& residual, double& scale) {
  const int n = static_cast<int>(a.size()) - 1;
  if (std::abs(z) <= 1.0) {
    cplx p = a[n];
    cplx dp = 0.0;
    double mag = std::abs(a[n]);
    const double az = std::abs(z);
    for (int k = n - 1; k >= 0; --k) {
      dp = dp * z + p;
      p = p * z + a[k];
      mag = mag * az + std::abs(a[k]);
    }
    residual = std::abs(p);
    scale = mag;
    if (dp == cplx(0.0)) return false;
    ratio = p / dp;
    return true;
  }
  // Reversed polynomial q(s) = s^n p(1/s); p/p' = z / (n - s q'(s)/q(s)).
  const cplx s = 1.0 / z;
  cplx q = a[0];
  cplx dq = 0.0;
  double mag = std::abs(a[0]);
  const double as = std::abs(s);
  for (int k = 1; k <= n; ++k) {
    dq = dq * s + q;
    q = q * s + a[k];
    mag = mag * as + std::abs(a[k]);
  }
  residual = std::abs(q);
  scale = mag;
  const cplx den = static_cast<double>(n) - s * dq / q;
  if (q == cplx(0.0)) {
    ratio = 0.0;
    return true;
  }
  if (den == cplx(0.0)) return false;
  ratio = z / den;
  return true;
}

std::vector<cplx> aberth(std::span<const cplx> a, bool& converged) {
  const int n = static_cast<int>(a.size()) - 1;
  std::vector<cplx> z(n);
  // Initial radius from the geometric mean of the root moduli.
  const double radius = std::pow(std::abs(a[0]) / std::abs(a[n]), 1.0 / n);
  const double r0 = radius > 0.0 && std::isfinite(radius) ? radius : 1.0;
  for (int k = 0; k < n; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / n + 0.4;
    z[k] = std::polar(r0, theta);
  }
  std::vector<bool> done(n, false);
  int remaining = n;
  constexpr int kMaxIterations = 2000;
  for (int it = 0; it < kMaxIterations && remaining > 0; ++it) {
    for (int i = 0; i < n; ++i) {
      if (done[i]) continue;
      cplx ratio;
      double residual = 0.0;
      double scale = 0.0;
      if (!newton_ratio(a, z[i], ratio, residual, scale)) {
        z[i] += std::polar(1e-3 * (1.0 + std::abs(z[i])), 0.7 * i + 0.1);
        continue;
      }
      if (residual <= 8.0 * n * kEps * scale) {
        done[i] = true;
        --remaining;
        continue;
      }
      cplx sum = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j != i) sum += 1.0 / (z[i] - z[j]);
      }
      const cplx step = ratio / (1.0 - ratio * sum);
      z[i] -= step;
      if (std::abs(step) <= 4.0 * kEps * std::abs(z[i])) {
        done[i] = true;
        --remaining;
      }
    }
  }
  converged = remaining == 0;
  return z;
}

std::vector<cplx> companion_roots(std::span<const cplx> a) {
  const int n = static_cast<int>(a.size()) - 1;
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) c(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) c(i, n - 1) = -a[i] / a[n];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(c, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NonConvergence, "companion eigenvalue solver failed");
  }
  std::vector<cplx> out(n);
  for (int i = 0; i < n; ++i) out[i] = solver.eigenvalues()(i);
  return out;
}

cplx polish(std::span<const cplx> a, cplx z, int steps) {
  for (int s = 0; s < steps; ++s) {
    cplx ratio;
    double residual = 0.0;
    double scale = 0.0;
    if (!newton_ratio(a, z, ratio, residual, scale)) break;
    if (residual <= 2.0 * kEps * scale) break;
    const cplx next = z - ratio;
    if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) break;
    z = next;
  }
  return z;
}

}  // namespace

int total_multiplicity(std::span<const MultiPoint> points) {
  int total = 0;
  for (const auto& p : points) total += p.multiplicity;
  return total;
}

ComplexPolynomial::ComplexPolynomial(std::vector<cplx> coefficients)
    : coeffs_(std::move(coefficients)) {
  trim();
}

ComplexPolynomial::ComplexPolynomial(std::initializer_list<cplx> coefficients)
    : coeffs_(coefficients) {
  trim();
}

ComplexPolynomial ComplexPolynomial::monomial(int degree, cplx coefficient) {
  std::vector<cplx> c(static_cast<std::size_t>(degree) + 1, cplx(0.0));
  c.back() = coefficient;
  return ComplexPolynomial(std::move(c));
}

void ComplexPolynomial::trim() {
  while (!coeffs_.empty() && coeffs_.back() == cplx(0.0)) coeffs_.pop_back();
}

cplx ComplexPolynomial::coefficient(int k) const noexcept {
  if (k < 0 || k > degree()) return 0.0;
  return coeffs_[static_cast<std::size_t>(k)];
}

cplx ComplexPolynomial::operator()(cplx z) const {
  cplx acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
  return acc;
}

cplx ComplexPolynomial::eval_reversed(cplx s, int formal_degree) const {
  cplx acc = 0.0;
  for (int k = 0; k <= formal_degree; ++k) acc = acc * s + coefficient(k);
  return acc;
}

double ComplexPolynomial::magnitude_at(cplx z) const {
  double acc = 0.0;
  const double az = std::abs(z);
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * az + std::abs(*it);
  return acc;
}

ComplexPolynomial ComplexPolynomial::derivative() const {
  if (degree() < 1) return {};
  std::vector<cplx> d(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = static_cast<double>(k) * coeffs_[k];
  return ComplexPolynomial(std::move(d));
}

ComplexPolynomial operator+(const ComplexPolynomial& a, const ComplexPolynomial& b) {
  std::vector<cplx> c(std::max(a.coeffs_.size(), b.coeffs_.size()), cplx(0.0));
  for (std::size_t k = 0; k < a.coeffs_.size(); ++k) c[k] += a.coeffs_[k];
  for (std::size_t k = 0; k < b.coeffs_.size(); ++k) c[k] += b.coeffs_[k];
  return ComplexPolynomial(std::move(c));
}

ComplexPolynomial operator-(const ComplexPolynomial& a, const ComplexPolynomial& b) {
  return a + cplx(-1.0) * b;
}

ComplexPolynomial operator*(const ComplexPolynomial& a, const ComplexPolynomial& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<cplx> c(a.coeffs_.size() + b.coeffs_.size() - 1, cplx(0.0));
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
  }
  return ComplexPolynomial(std::move(c));
}

ComplexPolynomial operator*(cplx s, const ComplexPolynomial& a) {
  std::vector<cplx> c = a.coeffs_;
  for (auto& x : c) x *= s;
  return ComplexPolynomial(std::move(c));
}

std::vector<MultiPoint> cluster_points(std::vector<MultiPoint> points, double radius) {
  std::sort(points.begin(), points.end(),
            [](const MultiPoint& x, const MultiPoint& y) { return lex_less(x.point, y.point); });
  const std::size_t n = points.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (chordal_distance(points[i].point, points[j].point) < radius) {
        const auto ri = find(i);
        const auto rj = find(j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
    }
  }
  std::vector<MultiPoint> out;
  std::vector<std::array<double, 3>> sums;
  std::vector<int> members;
  std::vector<std::size_t> slot(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = find(i);
    if (slot[r] == n) {
      slot[r] = out.size();
      out.push_back({points[i].point, 0});
      sums.push_back({0.0, 0.0, 0.0});
      members.push_back(0);
    }
    const auto c = slot[r];
    const auto e = points[i].point.embed();
    for (int k = 0; k < 3; ++k) sums[c][k] += points[i].multiplicity * e[k];
    out[c].multiplicity += points[i].multiplicity;
    ++members[c];
  }
  for (std::size_t c = 0; c < out.size(); ++c) {
    if (members[c] < 2) continue;
    // Centroid on the sphere, projected back to the surface.
    auto s = sums[c];
    const double norm = std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
    if (norm > 0.0) {
      for (auto& v : s) v /= norm;
      out[c].point = SpherePoint::from_embedding(s);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const MultiPoint& x, const MultiPoint& y) { return lex_less(x.point, y.point); });
  return out;
}

std::vector<MultiPoint> poly_roots(const ComplexPolynomial& p, double cluster_radius) {
  if (p.is_zero()) throw Error(ErrorCode::ZeroPolynomial, "poly_roots of the zero polynomial");
  std::vector<cplx> a = p.coefficients();
  std::vector<MultiPoint> roots;
  // Exact zero roots.
  std::size_t zeros = 0;
  while (zeros < a.size() && a[zeros] == cplx(0.0)) ++zeros;
  if (zeros > 0) {
    roots.push_back({SpherePoint::from_complex(0.0), static_cast<int>(zeros)});
    a.erase(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(zeros));
  }
  const int n = static_cast<int>(a.size()) - 1;
  if (n == 1) {
    roots.push_back({SpherePoint::from_complex(-a[0] / a[1]), 1});
  } else if (n == 2) {
    // Stable quadratic formula.
    const cplx disc = std::sqrt(a[1] * a[1] - 4.0 * a[2] * a[0]);
    const cplx q = std::real(std::conj(a[1]) * disc) >= 0.0 ? -0.5 * (a[1] + disc)
                                                             : -0.5 * (a[1] - disc);
    if (q == cplx(0.0)) {
      roots.push_back({SpherePoint::from_complex(0.0), 2});
    } else {
      roots.push_back({SpherePoint::from_complex(q / a[2]), 1});
      roots.push_back({SpherePoint::from_complex(a[0] / q), 1});
    }
  } else if (n > 2) {
    bool converged = false;
    std::vector<cplx> z = aberth(a, converged);
    if (!converged) z = companion_roots(a);
    for (auto& r : z) {
      r = polish(a, r, 3);
      if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) {
        throw Error(ErrorCode::NonConvergence,
                    "root iteration diverged for a degree " + std::to_string(n) + " polynomial");
      }
      roots.push_back({SpherePoint::from_complex(r), 1});
    }
  }
  auto clustered = cluster_points(std::move(roots), cluster_radius);
  // Refine multiple roots as simple roots of the (m-1)-th derivative.
  if (n > 2) {
    for (auto& c : clustered) {
      if (c.multiplicity < 2 || c.point.is_infinity()) continue;
      ComplexPolynomial d = p;
      for (int k = 1; k < c.multiplicity; ++k) d = d.derivative();
      const cplx start = c.point.to_complex();
      const cplx refined = polish(d.coefficients(), start, 8);
      const auto candidate = SpherePoint::from_complex(refined);
      if (chordal_distance(candidate, c.point) < cluster_radius) c.point = candidate;
    }
  }
  return clustered;
}

std::vector<MultiPoint> projective_roots(std::span<const cplx> coefficients, int formal_degree,
                                         double cluster_radius, double drop_tolerance) {
  double biggest = 0.0;
  for (const auto& c : coefficients) biggest = std::max(biggest, std::abs(c));
  if (biggest == 0.0) throw Error(ErrorCode::ZeroPolynomial, "projective_roots of zero");
  int effective = -1;
  for (int k = static_cast<int>(coefficients.size()) - 1; k >= 0; --k) {
    if (std::abs(coefficients[k]) > drop_tolerance * biggest) {
      effective = k;
      break;
    }
  }
  std::vector<MultiPoint> out;
  if (effective > 0) {
    std::vector<cplx> a(coefficients.begin(), coefficients.begin() + effective + 1);
    // Tiny low-order coefficients are kept: they encode roots near 0.
    out = poly_roots(ComplexPolynomial(std::move(a)), cluster_radius);
  }
  if (formal_degree > effective) {
    out.push_back({SpherePoint::infinity(), formal_degree - std::max(effective, 0)});
  }
  return cluster_points(std::move(out), cluster_radius);
}

RationalMap::RationalMap(ComplexPolynomial numerator, ComplexPolynomial denominator)
    : num_(std::move(numerator)), den_(std::move(denominator)) {
  if (den_.is_zero()) throw Error(ErrorCode::BadParameter, "rational map with zero denominator");
  if (degree() < 1) throw Error(ErrorCode::BadParameter, "rational map must have degree >= 1");
  if (num_.degree() >= 1 && den_.degree() >= 1) {
    const auto rn = poly_roots(num_, 1e-12);
    const auto rd = poly_roots(den_, 1e-12);
    for (const auto& x : rn) {
      for (const auto& y : rd) {
        if (std::abs(x.point.to_complex() - y.point.to_complex()) < 1e-10) {
          throw Error(ErrorCode::BadParameter, "numerator and denominator share a root");
        }
      }
    }
  }
}

RationalMap RationalMap::polynomial(ComplexPolynomial p) {
  return RationalMap(std::move(p), ComplexPolynomial{cplx(1.0)});
}

int RationalMap::degree() const noexcept { return std::max(num_.degree(), den_.degree()); }

RationalMap precompose(const RationalMap& r, const MobiusMap& m) {
  const int d = r.degree();
  const ComplexPolynomial top{m.b(), m.a()};
  const ComplexPolynomial bottom{m.d(), m.c()};
  // Homogenized substitution: sum_k a_k top^k bottom^(d - k).
  auto substitute = [&](const ComplexPolynomial& p) {
    ComplexPolynomial out;
    for (int k = 0; k <= p.degree(); ++k) {
      ComplexPolynomial term{p.coefficient(k)};
      for (int i = 0; i < k; ++i) term = term * top;
      for (int i = k; i < d; ++i) term = term * bottom;
      out = out + term;
    }
    return out;
  };
  return RationalMap(substitute(r.numerator()), substitute(r.denominator()));
}

SpherePoint rational_eval(const RationalMap& map, const SpherePoint& p) {
  const int d = map.degree();
  cplx n;
  cplx m;
  double scale = 0.0;
  if (p.chart() == Chart::Standard) {
    n = map.numerator()(p.value());
    m = map.denominator()(p.value());
    scale = map.numerator().magnitude_at(p.value()) + map.denominator().magnitude_at(p.value());
  } else {
    n = map.numerator().eval_reversed(p.value(), d);
    m = map.denominator().eval_reversed(p.value(), d);
    for (int k = 0; k <= d; ++k) {
      scale += (std::abs(map.numerator().coefficient(k)) + std::abs(map.denominator().coefficient(k))) *
               std::pow(std::abs(p.value()), d - k);
    }
  }
  if (std::abs(n) <= 1e-12 * scale && std::abs(m) <= 1e-12 * scale) {
    throw Error(ErrorCode::Indeterminate, "numerator and denominator both vanish");
  }
  if (std::abs(n) > std::abs(m)) return SpherePoint(m / n, Chart::Reciprocal);
  return SpherePoint(n / m, Chart::Standard);
}

std::vector<MultiPoint> critical_points(const RationalMap& map) {
  const int d = map.degree();
  if (d < 2) throw Error(ErrorCode::DegreeTooLow, "critical points need degree >= 2");
  const auto& p = map.numerator();
  const auto& q = map.denominator();
  const ComplexPolynomial w = p.derivative() * q - p * q.derivative();
  std::vector<cplx> coeffs = w.coefficients();
  coeffs.resize(static_cast<std::size_t>(2 * d - 1), cplx(0.0));
  return projective_roots(coeffs, 2 * d - 2);
}

MobiusMap::MobiusMap(cplx a, cplx b, cplx c, cplx d) {
  const double size = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
  if (size == 0.0) throw Error(ErrorCode::BadParameter, "Mobius map with zero coefficients");
  a /= size;
  b /= size;
  c /= size;
  d /= size;
  const cplx det = a * d - b * c;
  if (std::abs(det) <= 1e-12) throw Error(ErrorCode::BadParameter, "singular Mobius map");
  const cplx root = std::sqrt(det);
  a_ = a / root;
  b_ = b / root;
  c_ = c / root;
  d_ = d / root;
}

MobiusMap MobiusMap::inverse() const { return MobiusMap(d_, -b_, -c_, a_); }

MobiusMap operator*(const MobiusMap& outer, const MobiusMap& inner) {
  return MobiusMap(outer.a_ * inner.a_ + outer.b_ * inner.c_, outer.a_ * inner.b_ + outer.b_ * inner.d_,
                   outer.c_ * inner.a_ + outer.d_ * inner.c_, outer.c_ * inner.b_ + outer.d_ * inner.d_);
}

SpherePoint mobius_apply(const MobiusMap& m, const SpherePoint& p) {
  cplx num;
  cplx den;
  if (p.chart() == Chart::Standard) {
    num = m.a() * p.value() + m.b();
    den = m.c() * p.value() + m.d();
  } else {
    num = m.a() + m.b() * p.value();
    den = m.c() + m.d() * p.value();
  }
  if (std::abs(num) > std::abs(den)) return SpherePoint(den / num, Chart::Reciprocal);
  return SpherePoint(num / den, Chart::Standard);
}

bool mobius_is_involution(const MobiusMap& m) { return std::abs(m.a() + m.d()) < 1e-10; }

}  // namespace corrdyn
