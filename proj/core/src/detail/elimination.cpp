#include "detail/elimination.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace corrdyn::detail {

Determinant sylvester_resultant(std::span<const cplx> f, std::span<const cplx> g) {
  const int n = static_cast<int>(f.size()) - 1;
  const int m = static_cast<int>(g.size()) - 1;
  const int size = n + m;
  if (size == 0) return {cplx(1.0), 1.0};
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(size, size);
  // Descending coefficients, shifted one column per row.
  for (int r = 0; r < m; ++r) {
    for (int k = 0; k <= n; ++k) s(r, r + k) = f[static_cast<std::size_t>(n - k)];
  }
  for (int r = 0; r < n; ++r) {
    for (int k = 0; k <= m; ++k) s(m + r, r + k) = g[static_cast<std::size_t>(m - k)];
  }
  double bound = 1.0;
  for (int r = 0; r < size; ++r) bound *= s.row(r).norm();
  return {s.partialPivLu().determinant(), bound};
}

Determinant binary_discriminant(std::span<const cplx> a) {
  const int n = static_cast<int>(a.size()) - 1;
  if (n < 2) return {cplx(1.0), 1.0};
  // f(W, V) = sum a_j W^j V^(n-j); coefficients in W of f_W and f_V.
  std::vector<cplx> fw(static_cast<std::size_t>(n));
  std::vector<cplx> fv(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    fw[static_cast<std::size_t>(k)] = static_cast<double>(k + 1) * a[static_cast<std::size_t>(k + 1)];
    fv[static_cast<std::size_t>(k)] = static_cast<double>(n - k) * a[static_cast<std::size_t>(k)];
  }
  return sylvester_resultant(fw, fv);
}

std::vector<cplx> unit_roots(int n) {
  std::vector<cplx> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = std::polar(1.0, 2.0 * std::numbers::pi * k / n);
  return out;
}

std::vector<cplx> interpolate_on_unit_roots(std::span<const cplx> values) {
  const int n = static_cast<int>(values.size());
  std::vector<cplx> c(static_cast<std::size_t>(n), cplx(0.0));
  for (int j = 0; j < n; ++j) {
    cplx acc = 0.0;
    for (int k = 0; k < n; ++k) {
      acc += values[static_cast<std::size_t>(k)] *
             std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((static_cast<long>(j) * k) % n) / n);
    }
    c[static_cast<std::size_t>(j)] = acc / static_cast<double>(n);
  }
  return c;
}

}  // namespace corrdyn::detail
