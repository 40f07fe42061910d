#include "corrdyn/graph_polynomial.hpp"

#include <algorithm>
#include <cmath>

#include "corrdyn/error.hpp"

namespace corrdyn {

namespace {

constexpr double kTrimTolerance = 1e-14;

}  // namespace

GraphPolynomial::GraphPolynomial(int deg_z, int deg_w, std::vector<cplx> coeffs)
    : deg_z_(deg_z), deg_w_(deg_w), coeffs_(std::move(coeffs)) {
  if (deg_z_ < 0 || deg_w_ < 0 ||
      coeffs_.size() != static_cast<std::size_t>((deg_z_ + 1) * (deg_w_ + 1))) {
    throw Error(ErrorCode::BadParameter, "graph polynomial shape mismatch");
  }
  double biggest = 0.0;
  for (const auto& c : coeffs_) biggest = std::max(biggest, std::abs(c));
  if (biggest == 0.0) throw Error(ErrorCode::BadParameter, "zero graph polynomial");
  const double tiny = kTrimTolerance * biggest;
  auto row_empty = [&](int i) {
    for (int j = 0; j <= deg_w_; ++j) {
      if (std::abs(coeff(i, j)) > tiny) return false;
    }
    return true;
  };
  auto col_empty = [&](int j, int rows) {
    for (int i = 0; i <= rows; ++i) {
      if (std::abs(coeff(i, j)) > tiny) return false;
    }
    return true;
  };
  int new_z = deg_z_;
  while (new_z > 0 && row_empty(new_z)) --new_z;
  int new_w = deg_w_;
  while (new_w > 0 && col_empty(new_w, new_z)) --new_w;
  if (new_z != deg_z_ || new_w != deg_w_) {
    std::vector<cplx> c(static_cast<std::size_t>((new_z + 1) * (new_w + 1)));
    for (int i = 0; i <= new_z; ++i) {
      for (int j = 0; j <= new_w; ++j) c[static_cast<std::size_t>(i * (new_w + 1) + j)] = coeff(i, j);
    }
    deg_z_ = new_z;
    deg_w_ = new_w;
    coeffs_ = std::move(c);
  }
}

GraphPolynomial GraphPolynomial::from_mobius(const MobiusMap& m) {
  // Index (i, j) -> i * 2 + j for bidegree (1, 1).
  return GraphPolynomial(1, 1, {-m.b(), m.d(), -m.a(), m.c()});
}

GraphPolynomial GraphPolynomial::from_rational_map(const RationalMap& r) {
  const int d = r.degree();
  std::vector<cplx> c(static_cast<std::size_t>((d + 1) * 2), cplx(0.0));
  for (int i = 0; i <= d; ++i) {
    c[static_cast<std::size_t>(i * 2)] = -r.numerator().coefficient(i);
    c[static_cast<std::size_t>(i * 2 + 1)] = r.denominator().coefficient(i);
  }
  return GraphPolynomial(d, 1, std::move(c));
}

GraphPolynomial GraphPolynomial::identity() { return from_mobius(MobiusMap::identity()); }

double GraphPolynomial::coefficient_norm() const {
  double s = 0.0;
  for (const auto& c : coeffs_) s += std::abs(c);
  return s;
}

GraphPolynomial GraphPolynomial::transposed() const {
  std::vector<cplx> c(coeffs_.size());
  for (int i = 0; i <= deg_z_; ++i) {
    for (int j = 0; j <= deg_w_; ++j) c[static_cast<std::size_t>(j * (deg_z_ + 1) + i)] = coeff(i, j);
  }
  return GraphPolynomial(deg_w_, deg_z_, std::move(c));
}

std::vector<cplx> GraphPolynomial::specialize_z(const SpherePoint& z) const {
  std::vector<cplx> out(static_cast<std::size_t>(deg_w_ + 1), cplx(0.0));
  const cplx x = z.value();
  const bool reciprocal = z.chart() == Chart::Reciprocal;
  for (int j = 0; j <= deg_w_; ++j) {
    cplx acc = 0.0;
    if (!reciprocal) {
      for (int i = deg_z_; i >= 0; --i) acc = acc * x + coeff(i, j);
    } else {
      for (int i = 0; i <= deg_z_; ++i) acc = acc * x + coeff(i, j);
    }
    out[static_cast<std::size_t>(j)] = acc;
  }
  return out;
}

double GraphPolynomial::scaled_residual(const SpherePoint& z, const SpherePoint& w) const {
  const auto a = specialize_z(z);
  const cplx y = w.value();
  cplx acc = 0.0;
  if (w.chart() == Chart::Standard) {
    for (int j = deg_w_; j >= 0; --j) acc = acc * y + a[static_cast<std::size_t>(j)];
  } else {
    for (int j = 0; j <= deg_w_; ++j) acc = acc * y + a[static_cast<std::size_t>(j)];
  }
  return std::abs(acc) / coefficient_norm();
}

GraphPolynomial GraphPolynomial::in_charts(Chart z_chart, Chart w_chart) const {
  std::vector<cplx> c(coeffs_.size());
  for (int i = 0; i <= deg_z_; ++i) {
    for (int j = 0; j <= deg_w_; ++j) {
      const int ii = z_chart == Chart::Standard ? i : deg_z_ - i;
      const int jj = w_chart == Chart::Standard ? j : deg_w_ - j;
      c[static_cast<std::size_t>(ii * (deg_w_ + 1) + jj)] = coeff(i, j);
    }
  }
  GraphPolynomial g;
  g.deg_z_ = deg_z_;
  g.deg_w_ = deg_w_;
  g.coeffs_ = std::move(c);
  return g;
}

namespace {

// sum_ij c_ij * f(i) * z^(i - dz) * g(j) * w^(j - dw) for the derivative
// orders dz, dw.
cplx eval_derivative(const GraphPolynomial& b, cplx z, cplx w, int dz, int dw) {
  cplx total = 0.0;
  for (int i = b.deg_z(); i >= dz; --i) {
    cplx row = 0.0;
    for (int j = b.deg_w(); j >= dw; --j) {
      double f = 1.0;
      for (int k = 0; k < dw; ++k) f *= (j - k);
      row = row * w + f * b.coeff(i, j);
    }
    double g = 1.0;
    for (int k = 0; k < dz; ++k) g *= (i - k);
    total = total * z + g * row;
  }
  return total;
}

}  // namespace

cplx GraphPolynomial::operator()(cplx z, cplx w) const { return eval_derivative(*this, z, w, 0, 0); }
cplx GraphPolynomial::dz(cplx z, cplx w) const { return eval_derivative(*this, z, w, 1, 0); }
cplx GraphPolynomial::dw(cplx z, cplx w) const { return eval_derivative(*this, z, w, 0, 1); }
cplx GraphPolynomial::dzw(cplx z, cplx w) const { return eval_derivative(*this, z, w, 1, 1); }
cplx GraphPolynomial::dww(cplx z, cplx w) const { return eval_derivative(*this, z, w, 0, 2); }

GraphPolynomial cov_graph(const RationalMap& r) {
  const int d = r.degree();
  if (d < 2) throw Error(ErrorCode::DegreeTooLow, "deleted covering needs degree >= 2");
  // n_ij = p_i q_j - p_j q_i, viewed as sum_i z^i N_i(w).
  std::vector<std::vector<cplx>> rows(static_cast<std::size_t>(d + 1),
                                      std::vector<cplx>(static_cast<std::size_t>(d + 2), cplx(0.0)));
  double scale = 0.0;
  for (int i = 0; i <= d; ++i) {
    for (int j = 0; j <= d; ++j) {
      const cplx v = r.numerator().coefficient(i) * r.denominator().coefficient(j) -
                     r.numerator().coefficient(j) * r.denominator().coefficient(i);
      rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
      scale = std::max(scale, std::abs(v));
    }
  }
  // Synthetic division by (z - w): M_{d-1} = N_d, M_{i-1} = N_i + w M_i.
  std::vector<std::vector<cplx>> quotient(static_cast<std::size_t>(d));
  auto shift_add = [](const std::vector<cplx>& n, const std::vector<cplx>& m) {
    std::vector<cplx> out = n;
    for (std::size_t j = 0; j + 1 < out.size(); ++j) out[j + 1] += m[j];
    return out;
  };
  quotient[static_cast<std::size_t>(d - 1)] = rows[static_cast<std::size_t>(d)];
  for (int i = d - 1; i >= 1; --i) {
    quotient[static_cast<std::size_t>(i - 1)] =
        shift_add(rows[static_cast<std::size_t>(i)], quotient[static_cast<std::size_t>(i)]);
  }
  const auto remainder = shift_add(rows[0], quotient[0]);
  for (const auto& c : remainder) {
    if (std::abs(c) > 1e-10 * scale) {
      throw Error(ErrorCode::InexactDivision, "remainder of division by (z - w) does not vanish");
    }
  }
  std::vector<cplx> coeffs(static_cast<std::size_t>(d * d), cplx(0.0));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      coeffs[static_cast<std::size_t>(i * d + j)] = quotient[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    // The quotient rows have w-degree at most d - 1.
    if (std::abs(quotient[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)]) > 1e-10 * scale) {
      throw Error(ErrorCode::InexactDivision, "quotient exceeds the expected bidegree");
    }
  }
  return GraphPolynomial(d - 1, d - 1, std::move(coeffs));
}

}  // namespace corrdyn
