#include "corrdyn/correspondence.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

#include "corrdyn/error.hpp"
#include "detail/elimination.hpp"

namespace corrdyn {

namespace {

constexpr double kDegenerateFiber = 1e-13;
constexpr double kDiscriminantNoise = 1e-10;

void check_positive(int value, const char* what) {
  if (value < 1) throw Error(ErrorCode::BadParameter, std::string(what) + " must be positive");
}

std::vector<FiberPoint> merge_fiber(std::vector<FiberPoint> pts, double radius) {
  std::sort(pts.begin(), pts.end(), [](const FiberPoint& a, const FiberPoint& b) {
    if (a.label != b.label) return a.label < b.label;
    return lex_less(a.point, b.point);
  });
  std::vector<FiberPoint> out;
  std::vector<std::array<double, 3>> sums;
  std::vector<int> members;
  for (const auto& p : pts) {
    std::size_t hit = out.size();
    for (std::size_t k = 0; k < out.size(); ++k) {
      if (out[k].label == p.label && chordal_distance(out[k].point, p.point) < radius) {
        hit = k;
        break;
      }
    }
    const auto e = p.point.embed();
    if (hit == out.size()) {
      out.push_back(p);
      sums.push_back({p.multiplicity * e[0], p.multiplicity * e[1], p.multiplicity * e[2]});
      members.push_back(1);
      continue;
    }
    out[hit].multiplicity += p.multiplicity;
    out[hit].residual = std::max(out[hit].residual, p.residual);
    for (int k = 0; k < 3; ++k) sums[hit][static_cast<std::size_t>(k)] += p.multiplicity * e[static_cast<std::size_t>(k)];
    ++members[hit];
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (members[k] < 2) continue;
    auto s = sums[k];
    const double norm = std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
    if (norm == 0.0) continue;
    for (auto& v : s) v /= norm;
    out[k].point = SpherePoint::from_embedding(s);
  }
  std::sort(out.begin(), out.end(), [](const FiberPoint& a, const FiberPoint& b) {
    if (!(a.point == b.point)) return lex_less(a.point, b.point);
    return a.label < b.label;
  });
  return out;
}

std::vector<FiberPoint> direct_fiber(const Correspondence& c, const SpherePoint& z) {
  std::vector<FiberPoint> out;
  const auto& comps = c.components();
  for (std::size_t j = 0; j < comps.size(); ++j) {
    const auto& g = comps[j].graph;
    const auto a = g.specialize_z(z);
    double biggest = 0.0;
    for (const auto& v : a) biggest = std::max(biggest, std::abs(v));
    if (biggest <= kDegenerateFiber * g.coefficient_norm()) {
      throw Error(ErrorCode::FiberDegenerate, "component " + std::to_string(j) +
                                                  " contains the vertical line over the base point");
    }
    if (g.deg_w() == 0) continue;
    for (const auto& r : projective_roots(a, g.deg_w())) {
      out.push_back({r.point, r.multiplicity * comps[j].multiplicity, static_cast<int>(j),
                     g.scaled_residual(z, r.point)});
    }
  }
  return out;
}

}  // namespace

Correspondence Correspondence::direct(std::vector<Component> components, std::string name) {
  if (components.empty()) throw Error(ErrorCode::BadParameter, "correspondence without components");
  Correspondence c;
  c.components_ = std::move(components);
  c.stages_.clear();
  c.d1_ = 0;
  c.d2_ = 0;
  for (const auto& comp : c.components_) {
    check_positive(comp.multiplicity, "component multiplicity");
    c.d1_ += comp.multiplicity * comp.graph.deg_w();
    c.d2_ += comp.multiplicity * comp.graph.deg_z();
  }
  check_positive(c.d1_, "first bidegree");
  check_positive(c.d2_, "second bidegree");
  c.label_count_ = static_cast<int>(c.components_.size());
  c.name_ = std::move(name);
  return c;
}

Correspondence Correspondence::from_graph(GraphPolynomial graph, std::string name) {
  Correspondence c;
  c.components_ = {Component{std::move(graph), 1}};
  c.d1_ = c.components_[0].graph.deg_w();
  c.d2_ = c.components_[0].graph.deg_z();
  check_positive(c.d1_, "first bidegree");
  check_positive(c.d2_, "second bidegree");
  c.label_count_ = 1;
  c.name_ = std::move(name);
  return c;
}

Correspondence Correspondence::from_mobius(const MobiusMap& m, std::string name) {
  return from_graph(GraphPolynomial::from_mobius(m), std::move(name));
}

Correspondence Correspondence::from_rational_map(const RationalMap& r, std::string name) {
  return from_graph(GraphPolynomial::from_rational_map(r), std::move(name));
}

Correspondence Correspondence::chained(const std::vector<Correspondence>& stages, std::string name) {
  std::vector<Correspondence> flat;
  for (const auto& s : stages) {
    if (s.is_chained()) {
      flat.insert(flat.end(), s.stages_.begin(), s.stages_.end());
    } else {
      flat.push_back(s);
    }
  }
  if (flat.empty()) throw Error(ErrorCode::BadParameter, "empty chain");
  if (flat.size() == 1) return flat[0].renamed(name.empty() ? flat[0].name_ : std::move(name));
  Correspondence c;
  c.components_.clear();
  c.stages_ = std::move(flat);
  c.d1_ = 1;
  c.d2_ = 1;
  c.label_count_ = 1;
  for (const auto& s : c.stages_) {
    c.d1_ *= s.d1_;
    c.d2_ *= s.d2_;
    c.label_count_ *= s.label_count_;
  }
  c.name_ = std::move(name);
  return c;
}

Correspondence Correspondence::renamed(std::string name) const {
  Correspondence c = *this;
  c.name_ = std::move(name);
  return c;
}

Correspondence compose(const Correspondence& c1, const Correspondence& c2) {
  std::string name;
  if (!c1.name().empty() && !c2.name().empty()) name = c1.name() + "*" + c2.name();
  return Correspondence::chained({c2, c1}, std::move(name));
}

Correspondence inverse(const Correspondence& c) {
  const std::string name = c.name().empty() ? std::string() : c.name() + "^-1";
  if (c.is_chained()) {
    std::vector<Correspondence> rev;
    for (auto it = c.stages().rbegin(); it != c.stages().rend(); ++it) rev.push_back(inverse(*it));
    return Correspondence::chained(rev, name);
  }
  std::vector<Component> comps;
  for (const auto& comp : c.components()) comps.push_back({comp.graph.transposed(), comp.multiplicity});
  return Correspondence::direct(std::move(comps), name);
}

Correspondence cov_correspondence(const RationalMap& r, std::string name) {
  return Correspondence::from_graph(cov_graph(r), std::move(name));
}

int FiberResult::total_multiplicity() const {
  int total = 0;
  for (const auto& p : points) total += p.multiplicity;
  return total;
}

std::vector<MultiPoint> FiberResult::multiset(double cluster_radius) const {
  std::vector<MultiPoint> pts;
  pts.reserve(points.size());
  for (const auto& p : points) pts.push_back({p.point, p.multiplicity});
  return cluster_points(std::move(pts), cluster_radius);
}

FiberResult forward(const Correspondence& c, const SpherePoint& z) {
  if (!c.is_chained()) return {merge_fiber(direct_fiber(c, z), kDefaultClusterRadius)};
  std::vector<FiberPoint> current{{z, 1, 0, 0.0}};
  int radix = 1;
  for (const auto& stage : c.stages()) {
    std::vector<FiberPoint> next;
    for (const auto& item : current) {
      for (const auto& f : direct_fiber(stage, item.point)) {
        next.push_back({f.point, item.multiplicity * f.multiplicity, item.label + radix * f.label,
                        std::max(item.residual, f.residual)});
      }
    }
    radix *= stage.label_count();
    current = merge_fiber(std::move(next), kDefaultClusterRadius);
  }
  return {std::move(current)};
}

FiberResult backward(const Correspondence& c, const SpherePoint& w) { return forward(inverse(c), w); }

GraphMembership is_on_graph(const Correspondence& c, const SpherePoint& z, const SpherePoint& w, double tol) {
  double best = std::numeric_limits<double>::infinity();
  if (!c.is_chained()) {
    for (const auto& comp : c.components()) best = std::min(best, comp.graph.scaled_residual(z, w));
    return {best < tol, best};
  }
  std::vector<SpherePoint> current{z};
  const auto& stages = c.stages();
  for (std::size_t s = 0; s + 1 < stages.size(); ++s) {
    std::vector<SpherePoint> next;
    for (const auto& p : current) {
      for (const auto& f : direct_fiber(stages[s], p)) next.push_back(f.point);
    }
    current = std::move(next);
  }
  for (const auto& p : current) {
    for (const auto& comp : stages.back().components()) best = std::min(best, comp.graph.scaled_residual(p, w));
  }
  return {best < tol, best};
}

GraphPolynomial compose_graph_poly(const Correspondence& c1, const Correspondence& c2, int degree_bound) {
  auto single = [](const Correspondence& c) -> const GraphPolynomial& {
    if (c.is_chained() || c.components().size() != 1) {
      throw Error(ErrorCode::BadParameter, "compose_graph_poly needs single-component direct factors");
    }
    return c.components()[0].graph;
  };
  const GraphPolynomial& b2 = single(c2);  // (z, u)
  const GraphPolynomial b1t = single(c1).transposed();  // (w, u)
  const int dz = b2.deg_z() * b1t.deg_w();
  const int dw = b1t.deg_z() * b2.deg_w();
  if (static_cast<long>(dz + 1) * (dw + 1) > static_cast<long>(degree_bound) * degree_bound) {
    throw Error(ErrorCode::DegreeBoundExceeded, "resultant bidegree (" + std::to_string(dz) + ", " +
                                                    std::to_string(dw) + ") exceeds the bound");
  }
  const auto zn = detail::unit_roots(dz + 1);
  const auto wn = detail::unit_roots(dw + 1);
  std::vector<std::vector<cplx>> fz;
  std::vector<std::vector<cplx>> gw;
  for (const auto& z : zn) fz.push_back(b2.specialize_z(SpherePoint(z, Chart::Standard)));
  for (const auto& w : wn) gw.push_back(b1t.specialize_z(SpherePoint(w, Chart::Standard)));
  // values[k][l] = R(z_k, w_l); interpolate along w, then along z.
  std::vector<std::vector<cplx>> along_w(static_cast<std::size_t>(dz + 1));
  double grid_scale = 0.0;
  for (int k = 0; k <= dz; ++k) {
    std::vector<cplx> row(static_cast<std::size_t>(dw + 1));
    for (int l = 0; l <= dw; ++l) {
      row[static_cast<std::size_t>(l)] =
          detail::sylvester_resultant(fz[static_cast<std::size_t>(k)], gw[static_cast<std::size_t>(l)]).value;
      grid_scale = std::max(grid_scale, std::abs(row[static_cast<std::size_t>(l)]));
    }
    along_w[static_cast<std::size_t>(k)] = detail::interpolate_on_unit_roots(row);
  }
  if (grid_scale == 0.0) throw Error(ErrorCode::InterpolationIllConditioned, "resultant vanishes on the grid");
  std::vector<cplx> coeffs(static_cast<std::size_t>((dz + 1) * (dw + 1)));
  for (int j = 0; j <= dw; ++j) {
    std::vector<cplx> col(static_cast<std::size_t>(dz + 1));
    for (int k = 0; k <= dz; ++k) col[static_cast<std::size_t>(k)] = along_w[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
    const auto c = detail::interpolate_on_unit_roots(col);
    for (int i = 0; i <= dz; ++i) coeffs[static_cast<std::size_t>(i * (dw + 1) + j)] = c[static_cast<std::size_t>(i)];
  }
  // Off-grid consistency check against direct evaluation.
  constexpr std::array<std::pair<cplx, cplx>, 3> probes{{
      {cplx(0.31, 0.42), cplx(-0.53, 0.27)},
      {cplx(0.74, -0.12), cplx(0.21, 0.63)},
      {cplx(-0.61, -0.33), cplx(0.14, -0.82)},
  }};
  double worst = 0.0;
  for (const auto& [z, w] : probes) {
    cplx interp = 0.0;
    for (int i = dz; i >= 0; --i) {
      cplx row = 0.0;
      for (int j = dw; j >= 0; --j) row = row * w + coeffs[static_cast<std::size_t>(i * (dw + 1) + j)];
      interp = interp * z + row;
    }
    const cplx exact = detail::sylvester_resultant(b2.specialize_z(SpherePoint(z, Chart::Standard)),
                                                   b1t.specialize_z(SpherePoint(w, Chart::Standard)))
                           .value;
    worst = std::max(worst, std::abs(interp - exact) / grid_scale);
  }
  if (worst > 1e-8) {
    throw Error(ErrorCode::InterpolationIllConditioned,
                "interpolated resultant misses off-grid values; condition estimate " +
                    std::to_string(worst / std::numeric_limits<double>::epsilon()));
  }
  double biggest = 0.0;
  for (const auto& c : coeffs) biggest = std::max(biggest, std::abs(c));
  for (auto& c : coeffs) c = std::abs(c) <= 1e-12 * biggest ? cplx(0.0) : c / biggest;
  return GraphPolynomial(dz, dw, std::move(coeffs));
}

namespace {

// Solves G = 0, dG/dy = 0 by Newton's method in the charts of the start point.
GraphPoint refine_collision(const GraphPolynomial& g, const SpherePoint& x0, const SpherePoint& y0) {
  const auto h = g.in_charts(x0.chart(), y0.chart());
  cplx x = x0.value();
  cplx y = y0.value();
  const double norm = h.coefficient_norm();
  auto size = [&](cplx a, cplx b) { return std::abs(h(a, b)) + std::abs(h.dw(a, b)); };
  const double start = size(x, y);
  for (int it = 0; it < 40; ++it) {
    const cplx f1 = h(x, y);
    const cplx f2 = h.dw(x, y);
    const cplx a = h.dz(x, y);
    const cplx b = f2;
    const cplx c = h.dzw(x, y);
    const cplx d = h.dww(x, y);
    const cplx det = a * d - b * c;
    if (std::abs(det) <= 1e-14 * norm * norm) break;
    const cplx dx = (d * f1 - b * f2) / det;
    const cplx dy = (a * f2 - c * f1) / det;
    if (!std::isfinite(std::abs(dx)) || !std::isfinite(std::abs(dy))) break;
    x -= dx;
    y -= dy;
    if (std::abs(dx) + std::abs(dy) <= 1e-15) break;
  }
  const SpherePoint rx(x, x0.chart());
  const SpherePoint ry(y, y0.chart());
  if (size(x, y) <= start && chordal_distance(rx, x0) < 1e-3 && chordal_distance(ry, y0) < 1e-3) {
    return {rx, ry};
  }
  return {x0, y0};
}

void add_unique(std::vector<GraphPoint>& out, const GraphPoint& p) {
  for (const auto& q : out) {
    if (chordal_distance(q.first, p.first) < kDefaultClusterRadius &&
        chordal_distance(q.second, p.second) < kDefaultClusterRadius) {
      return;
    }
  }
  out.push_back(p);
}

// Points (x, y) of the curve G = 0 where two y-roots over the same x collide.
std::vector<GraphPoint> y_collisions(const GraphPolynomial& g) {
  const int m = g.deg_z();
  const int n = g.deg_w();
  if (n < 2) return {};
  const int formal = 2 * m * (n - 1);
  const auto nodes = detail::unit_roots(formal + 1);
  std::vector<cplx> values;
  bool degenerate = true;
  for (const auto& x : nodes) {
    const auto det = detail::binary_discriminant(g.specialize_z(SpherePoint(x, Chart::Standard)));
    values.push_back(det.value);
    if (std::abs(det.value) > kDiscriminantNoise * det.bound) degenerate = false;
  }
  if (degenerate) {
    throw Error(ErrorCode::DiscriminantDegenerate, "discriminant vanishes identically (multiple component)");
  }
  std::vector<GraphPoint> out;
  if (formal == 0) return out;
  const auto disc = detail::interpolate_on_unit_roots(values);
  for (const auto& root : projective_roots(disc, formal, kDefaultClusterRadius, 1e-12)) {
    const auto a = g.specialize_z(root.point);
    double biggest = 0.0;
    for (const auto& v : a) biggest = std::max(biggest, std::abs(v));
    if (biggest <= kDegenerateFiber * g.coefficient_norm()) continue;
    const auto ys = projective_roots(a, n, 1e-5);
    bool found = false;
    for (const auto& y : ys) {
      if (y.multiplicity < 2) continue;
      add_unique(out, refine_collision(g, root.point, y.point));
      found = true;
    }
    if (found) continue;
    // The base point is slightly off: take the closest pair of roots.
    double best = 1e-3;
    std::optional<SpherePoint> mid;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      for (std::size_t j = i + 1; j < ys.size(); ++j) {
        const double dist = chordal_distance(ys[i].point, ys[j].point);
        if (dist < best) {
          best = dist;
          const auto e1 = ys[i].point.embed();
          const auto e2 = ys[j].point.embed();
          std::array<double, 3> s{e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]};
          const double nn = std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
          for (auto& v : s) v /= nn;
          mid = SpherePoint::from_embedding(s);
        }
      }
    }
    if (mid) add_unique(out, refine_collision(g, root.point, *mid));
  }
  return out;
}

std::vector<GraphPoint> swapped(std::vector<GraphPoint> pts) {
  for (auto& p : pts) std::swap(p.first, p.second);
  return pts;
}

std::vector<GraphPoint> direct_a1(const Correspondence& c) {
  std::vector<GraphPoint> out;
  for (const auto& comp : c.components()) {
    for (const auto& p : y_collisions(comp.graph)) add_unique(out, p);
  }
  return out;
}

// A1 of a chain: base points where the forward fiber collides.
std::vector<GraphPoint> chain_a1(const Correspondence& c) {
  const auto& stages = c.stages();
  std::vector<SpherePoint> targets;
  for (std::size_t s = stages.size(); s-- > 0;) {
    std::vector<SpherePoint> next;
    for (const auto& p : direct_a1(stages[s])) next.push_back(p.first);
    for (const auto& t : targets) {
      for (const auto& f : direct_fiber(inverse(stages[s]), t)) next.push_back(f.point);
    }
    targets = std::move(next);
  }
  std::vector<MultiPoint> bases;
  for (const auto& t : targets) bases.push_back({t, 1});
  std::vector<GraphPoint> out;
  for (const auto& b : cluster_points(std::move(bases), kDefaultClusterRadius)) {
    for (const auto& f : forward(c, b.point).multiset()) {
      if (f.multiplicity >= 2) add_unique(out, {b.point, f.point});
    }
  }
  return out;
}

std::vector<GraphPoint> a1_of(const Correspondence& c) { return c.is_chained() ? chain_a1(c) : direct_a1(c); }

}  // namespace

Ramification ramification(const Correspondence& c) {
  Ramification r;
  r.a1 = a1_of(c);
  r.a2 = swapped(a1_of(inverse(c)));
  return r;
}

std::vector<GraphPoint> ramification_points(const Correspondence& c) { return ramification(c).a2; }

std::vector<MultiPoint> critical_values(const Correspondence& c, int side) {
  if (side != 1 && side != 2) throw Error(ErrorCode::BadParameter, "side must be 1 or 2");
  const auto r = ramification(c);
  std::vector<MultiPoint> pts;
  if (side == 1) {
    for (const auto& p : r.a1) pts.push_back({p.first, 1});
  } else {
    for (const auto& p : r.a2) pts.push_back({p.second, 1});
  }
  return cluster_points(std::move(pts), kDefaultClusterRadius);
}

int diagonal_multiplicity(const GraphPolynomial& b, const SpherePoint& p, double cluster_radius) {
  std::vector<cplx> diag(static_cast<std::size_t>(b.deg_z() + b.deg_w() + 1), cplx(0.0));
  for (int i = 0; i <= b.deg_z(); ++i) {
    for (int j = 0; j <= b.deg_w(); ++j) diag[static_cast<std::size_t>(i + j)] += b.coeff(i, j);
  }
  double biggest = 0.0;
  for (const auto& v : diag) biggest = std::max(biggest, std::abs(v));
  if (biggest <= 1e-13 * b.coefficient_norm()) {
    throw Error(ErrorCode::BadParameter, "the diagonal lies in the curve");
  }
  for (const auto& r : projective_roots(diag, b.deg_z() + b.deg_w(), cluster_radius)) {
    if (chordal_distance(r.point, p) < cluster_radius) return r.multiplicity;
  }
  return 0;
}

}  // namespace corrdyn
