#include "corrdyn/sphere.hpp"

#include <cmath>

namespace corrdyn {

SpherePoint::SpherePoint(cplx value, Chart chart) : value_(value), chart_(chart) {
  if (std::abs(value_) > 1.0 + kNormalizationSlack) {
    value_ = 1.0 / value_;
    chart_ = chart_ == Chart::Standard ? Chart::Reciprocal : Chart::Standard;
  }
  // Signed zeros would make equal points compare unequal.
  if (value_.real() == 0.0) value_.real(0.0);
  if (value_.imag() == 0.0) value_.imag(0.0);
}

SpherePoint SpherePoint::from_complex(cplx z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return infinity();
  return SpherePoint(z, Chart::Standard);
}

cplx SpherePoint::to_complex() const {
  if (chart_ == Chart::Standard) return value_;
  if (value_ == cplx(0.0, 0.0)) return {std::numeric_limits<double>::infinity(), 0.0};
  return 1.0 / value_;
}

cplx SpherePoint::coordinate_in(Chart chart) const {
  if (chart == chart_) return value_;
  if (value_ == cplx(0.0, 0.0)) return {std::numeric_limits<double>::infinity(), 0.0};
  return 1.0 / value_;
}

std::array<double, 3> SpherePoint::embed() const {
  const double a = std::norm(value_);
  const double den = 1.0 + a;
  if (chart_ == Chart::Standard) {
    return {2.0 * value_.real() / den, 2.0 * value_.imag() / den, (a - 1.0) / den};
  }
  // z = 1/s = conj(s)/|s|^2
  return {2.0 * value_.real() / den, -2.0 * value_.imag() / den, (1.0 - a) / den};
}

SpherePoint SpherePoint::from_embedding(const std::array<double, 3>& x) {
  const double z = x[2];
  if (z <= 0.0) {
    // Project from the north pole: z = (X + iY) / (1 - Z).
    return SpherePoint(cplx(x[0], x[1]) / (1.0 - z), Chart::Standard);
  }
  // s = 1/z = (X - iY) / (1 + Z)
  return SpherePoint(cplx(x[0], -x[1]) / (1.0 + z), Chart::Reciprocal);
}

double chordal_distance(const SpherePoint& p, const SpherePoint& q) {
  if (p.chart() == q.chart()) {
    const double num = 2.0 * std::abs(p.value() - q.value());
    return num / std::sqrt((1.0 + std::norm(p.value())) * (1.0 + std::norm(q.value())));
  }
  // Mixed charts: with s = 1/w, |z - w| / sqrt((1+|z|^2)(1+|w|^2)) = |z s - 1| / sqrt((1+|z|^2)(1+|s|^2)).
  const cplx z = p.chart() == Chart::Standard ? p.value() : q.value();
  const cplx s = p.chart() == Chart::Standard ? q.value() : p.value();
  const double num = 2.0 * std::abs(z * s - 1.0);
  return num / std::sqrt((1.0 + std::norm(z)) * (1.0 + std::norm(s)));
}

bool lex_less(const SpherePoint& p, const SpherePoint& q) {
  const bool pi = p.is_infinity();
  const bool qi = q.is_infinity();
  if (pi || qi) return !pi && qi;
  const cplx a = p.to_complex();
  const cplx b = q.to_complex();
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

}  // namespace corrdyn
