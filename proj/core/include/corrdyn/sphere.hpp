#pragma once

#include <array>
#include <complex>
#include <limits>

namespace corrdyn {

using cplx = std::complex<double>;

enum class Chart { Standard, Reciprocal };

// A point of the Riemann sphere stored in whichever of the two affine charts
// keeps the coordinate inside the closed unit disk.  The reciprocal chart
// stores s = 1/z, so infinity is exactly (0, Reciprocal).
class SpherePoint {
 public:
  static constexpr double kNormalizationSlack = 1e-9;

  SpherePoint() = default;
  SpherePoint(cplx value, Chart chart);

  static SpherePoint from_complex(cplx z);
  static SpherePoint infinity() { return SpherePoint(cplx(0.0, 0.0), Chart::Reciprocal); }

  cplx value() const noexcept { return value_; }
  Chart chart() const noexcept { return chart_; }

  bool is_infinity() const noexcept { return chart_ == Chart::Reciprocal && value_ == cplx(0.0, 0.0); }

  // Affine coordinate z; infinity maps to an infinite complex number.
  cplx to_complex() const;

  // Coordinate of the point in the requested chart; may leave the unit disk
  // and is infinite when the point is the pole of that chart.
  cplx coordinate_in(Chart chart) const;

  // Point on the unit sphere in R^3 (stereographic projection from the north pole).
  std::array<double, 3> embed() const;
  static SpherePoint from_embedding(const std::array<double, 3>& x);

  friend bool operator==(const SpherePoint& a, const SpherePoint& b) = default;

 private:
  cplx value_{0.0, 0.0};
  Chart chart_ = Chart::Standard;
};

double chordal_distance(const SpherePoint& p, const SpherePoint& q);

// Canonical total order: standard chart before reciprocal, then (re, im) of
// the affine coordinate.  Used wherever a deterministic ordering is required.
bool lex_less(const SpherePoint& p, const SpherePoint& q);

}  // namespace corrdyn
