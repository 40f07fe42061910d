#pragma once

#include <vector>

#include "corrdyn/polynomial.hpp"
#include "corrdyn/sphere.hpp"

namespace corrdyn {

// Bivariate polynomial B(z, w) = sum c_ij z^i w^j cutting out one graph
// component.  Dense storage, row-major in the z index.  Degrees are tight:
// the top row and the top column each hold a nonzero coefficient.
class GraphPolynomial {
 public:
  GraphPolynomial() = default;
  // Trims numerically empty top rows/columns; throws BadParameter for the zero
  // polynomial.
  GraphPolynomial(int deg_z, int deg_w, std::vector<cplx> coeffs);

  // Graph of a Mobius map: w (cz + d) - (az + b).
  static GraphPolynomial from_mobius(const MobiusMap& m);
  // Graph of a rational map: w q(z) - p(z).
  static GraphPolynomial from_rational_map(const RationalMap& r);
  static GraphPolynomial identity();

  int deg_z() const noexcept { return deg_z_; }
  int deg_w() const noexcept { return deg_w_; }
  const std::vector<cplx>& coeffs() const noexcept { return coeffs_; }
  cplx coeff(int i, int j) const noexcept { return coeffs_[static_cast<std::size_t>(i * (deg_w_ + 1) + j)]; }
  double coefficient_norm() const;

  // B(w, z): the graph of the inverse correspondence.
  GraphPolynomial transposed() const;

  // Coefficients (ascending in w, formal degree deg_w) of B(z, .) with z
  // homogenized in its stored chart.
  std::vector<cplx> specialize_z(const SpherePoint& z) const;

  // Bihomogeneous value of B at (z, w) in the stored charts of both points,
  // divided by the coefficient norm.
  double scaled_residual(const SpherePoint& z, const SpherePoint& w) const;

  // The same curve written in the local coordinates of the given charts
  // (index reversal in the reciprocal directions).
  GraphPolynomial in_charts(Chart z_chart, Chart w_chart) const;

  cplx operator()(cplx z, cplx w) const;
  cplx dz(cplx z, cplx w) const;
  cplx dw(cplx z, cplx w) const;
  cplx dzw(cplx z, cplx w) const;
  cplx dww(cplx z, cplx w) const;

  friend bool operator==(const GraphPolynomial&, const GraphPolynomial&) = default;

 private:
  int deg_z_ = 0;
  int deg_w_ = 0;
  std::vector<cplx> coeffs_{cplx(1.0)};
};

// (p(z) q(w) - p(w) q(z)) / (z - w) by synthetic division in z with an
// exactness check on the remainder.  Throws DegreeTooLow, InexactDivision.
GraphPolynomial cov_graph(const RationalMap& r);

}  // namespace corrdyn
