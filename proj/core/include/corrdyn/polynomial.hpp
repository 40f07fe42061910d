#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "corrdyn/sphere.hpp"

namespace corrdyn {

// A point with a positive integer multiplicity; the element type of every
// "multiset of points" in the library.
struct MultiPoint {
  SpherePoint point;
  int multiplicity = 1;
};

int total_multiplicity(std::span<const MultiPoint> points);

// Dense univariate polynomial, coefficients in ascending degree.  Exact zero
// high-order coefficients are trimmed on construction.
class ComplexPolynomial {
 public:
  static constexpr int kZeroDegree = -1;

  ComplexPolynomial() = default;
  explicit ComplexPolynomial(std::vector<cplx> coefficients);
  ComplexPolynomial(std::initializer_list<cplx> coefficients);

  static ComplexPolynomial monomial(int degree, cplx coefficient = 1.0);

  const std::vector<cplx>& coefficients() const noexcept { return coeffs_; }
  // kZeroDegree for the zero polynomial.
  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const noexcept { return coeffs_.empty(); }
  cplx coefficient(int k) const noexcept;
  cplx leading() const noexcept { return is_zero() ? cplx{} : coeffs_.back(); }

  cplx operator()(cplx z) const;
  // Value of z^formal_degree * p(1/z).
  cplx eval_reversed(cplx s, int formal_degree) const;
  // Sum of |a_k| |z|^k; the scale used for relative residuals.
  double magnitude_at(cplx z) const;

  ComplexPolynomial derivative() const;

  friend ComplexPolynomial operator+(const ComplexPolynomial& a, const ComplexPolynomial& b);
  friend ComplexPolynomial operator-(const ComplexPolynomial& a, const ComplexPolynomial& b);
  friend ComplexPolynomial operator*(const ComplexPolynomial& a, const ComplexPolynomial& b);
  friend ComplexPolynomial operator*(cplx s, const ComplexPolynomial& a);
  friend bool operator==(const ComplexPolynomial&, const ComplexPolynomial&) = default;

 private:
  void trim();
  std::vector<cplx> coeffs_;
};

inline constexpr double kDefaultClusterRadius = 1e-6;

// All roots of p with multiplicity.  Roots closer than cluster_radius
// (chordal) are merged at their centroid.  Throws ZeroPolynomial or
// NonConvergence.
std::vector<MultiPoint> poly_roots(const ComplexPolynomial& p,
                                   double cluster_radius = kDefaultClusterRadius);

// Roots of a polynomial of formal degree `formal_degree` whose actual degree
// may be lower: the missing roots are placed at infinity.  Leading
// coefficients below `drop_tolerance` relative to the largest coefficient are
// treated as zero.
std::vector<MultiPoint> projective_roots(std::span<const cplx> coefficients, int formal_degree,
                                         double cluster_radius = kDefaultClusterRadius,
                                         double drop_tolerance = 1e-13);

// Merge points closer than radius (chordal) into their centroid, summing
// multiplicities.  Output is sorted by lex_less.
std::vector<MultiPoint> cluster_points(std::vector<MultiPoint> points, double radius);

class RationalMap {
 public:
  RationalMap() = default;
  // Validates that numerator and denominator share no root and that the
  // degree is at least 1; throws BadParameter otherwise.
  RationalMap(ComplexPolynomial numerator, ComplexPolynomial denominator);

  static RationalMap polynomial(ComplexPolynomial p);

  const ComplexPolynomial& numerator() const noexcept { return num_; }
  const ComplexPolynomial& denominator() const noexcept { return den_; }
  int degree() const noexcept;

 private:
  ComplexPolynomial num_;
  ComplexPolynomial den_{cplx(1.0)};
};

SpherePoint rational_eval(const RationalMap& map, const SpherePoint& p);

// Critical points with multiplicity; total multiplicity is 2 deg - 2.
std::vector<MultiPoint> critical_points(const RationalMap& map);

class MobiusMap {
 public:
  MobiusMap() = default;
  // Normalized to determinant 1; throws BadParameter when |ad - bc| is ~0.
  MobiusMap(cplx a, cplx b, cplx c, cplx d);

  static MobiusMap identity() { return {}; }

  cplx a() const noexcept { return a_; }
  cplx b() const noexcept { return b_; }
  cplx c() const noexcept { return c_; }
  cplx d() const noexcept { return d_; }

  MobiusMap inverse() const;
  friend MobiusMap operator*(const MobiusMap& outer, const MobiusMap& inner);

 private:
  cplx a_{1.0}, b_{0.0}, c_{0.0}, d_{1.0};
};

SpherePoint mobius_apply(const MobiusMap& m, const SpherePoint& p);
bool mobius_is_involution(const MobiusMap& m);

// z -> r(m(z)).
RationalMap precompose(const RationalMap& r, const MobiusMap& m);

}  // namespace corrdyn
