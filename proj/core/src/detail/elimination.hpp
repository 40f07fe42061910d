#pragma once

#include <complex>
#include <span>
#include <vector>

namespace corrdyn::detail {

using cplx = std::complex<double>;

struct Determinant {
  cplx value;
  // Hadamard bound on |value|: the product of the row norms.
  double bound;
};

// Resultant of the binary forms f and g of formal degrees f.size()-1 and
// g.size()-1 (ascending coefficients), as the Sylvester determinant.
Determinant sylvester_resultant(std::span<const cplx> f, std::span<const cplx> g);

// Discriminant (up to a constant factor) of the binary form of formal degree
// a.size()-1, as the resultant of its two partial derivatives.  Vanishes
// exactly when the form has a repeated root on the projective line,
// including a repeated root at infinity.
Determinant binary_discriminant(std::span<const cplx> a);

// Unit-circle interpolation nodes exp(2 pi i k / n).
std::vector<cplx> unit_roots(int n);

// Coefficients c_0..c_{n-1} of the polynomial taking values[k] at the n-th
// roots of unity (inverse DFT).
std::vector<cplx> interpolate_on_unit_roots(std::span<const cplx> values);

}  // namespace corrdyn::detail
