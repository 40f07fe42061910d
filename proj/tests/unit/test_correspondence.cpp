#include <algorithm>
#include <cmath>

#include "corrdyn/correspondence.hpp"
#include "corrdyn/error.hpp"
#include "corrdyn/family.hpp"
#include "corrdyn/graph_polynomial.hpp"
#include "corrdyn/random.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace corrdyn;

namespace {

SpherePoint pt(cplx z) { return SpherePoint::from_complex(z); }
const RationalMap kQ = RationalMap::polynomial(ComplexPolynomial{0.0, -3.0, 0.0, 1.0});

// Largest coefficient mismatch after scaling b onto a.
double projective_gap(const GraphPolynomial& a, const std::vector<std::vector<cplx>>& b) {
  if (a.deg_z() + 1 != static_cast<int>(b.size()) || a.deg_w() + 1 != static_cast<int>(b[0].size())) return INFINITY;
  int bi = 0, bj = 0;
  double big = 0.0, scale = 0.0;
  for (int i = 0; i <= a.deg_z(); ++i)
    for (int j = 0; j <= a.deg_w(); ++j) {
      scale = std::max(scale, std::abs(a.coeff(i, j)));
      if (std::abs(b[i][j]) > big) big = std::abs(b[i][j]), bi = i, bj = j;
    }
  const cplx lambda = a.coeff(bi, bj) / b[bi][bj];
  double gap = 0.0;
  for (int i = 0; i <= a.deg_z(); ++i)
    for (int j = 0; j <= a.deg_w(); ++j) gap = std::max(gap, std::abs(a.coeff(i, j) - lambda * b[i][j]));
  return gap / scale;
}

std::vector<std::vector<cplx>> table_of(const GraphPolynomial& g) {
  std::vector<std::vector<cplx>> t(g.deg_z() + 1, std::vector<cplx>(g.deg_w() + 1));
  for (int i = 0; i <= g.deg_z(); ++i)
    for (int j = 0; j <= g.deg_w(); ++j) t[i][j] = g.coeff(i, j);
  return t;
}

// Sorted multiset equality within tol (chordal), multiplicities included.
bool same_fiber(std::vector<MultiPoint> a, std::vector<MultiPoint> b, double tol) {
  if (total_multiplicity(a) != total_multiplicity(b)) return false;
  for (const auto& p : a) {
    int ma = 0, mb = 0;
    for (const auto& q : a)
      if (chordal_distance(p.point, q.point) < tol) ma += q.multiplicity;
    for (const auto& q : b)
      if (chordal_distance(p.point, q.point) < tol) mb += q.multiplicity;
    if (ma != mb) return false;
  }
  return true;
}

RationalMap random_map(SplitMix64& rng, int d) {
  for (;;) {
    std::vector<cplx> p, q;
    for (int k = 0; k <= d; ++k) p.push_back(oracle::random_complex(rng, 2.0));
    for (int k = 0; k <= d - 1; ++k) q.push_back(oracle::random_complex(rng, 2.0));
    try {
      return RationalMap(ComplexPolynomial(p), ComplexPolynomial(q));
    } catch (const Error&) {
    }
  }
}

bool contains_point(const std::vector<MultiPoint>& set, const SpherePoint& p, double tol) {
  return std::any_of(set.begin(), set.end(), [&](const MultiPoint& m) { return chordal_distance(m.point, p) < tol; });
}

}  // namespace

TEST_SUITE("correspondence_core") {
  TEST_CASE("deleted covering of Q is z^2 + zw + w^2 - 3") {
    const auto oracle_table = oracle::deleted_covering_table({0.0, -3.0, 0.0, 1.0}, {1.0});
    // Frozen from the oracle.
    const std::vector<std::vector<cplx>> frozen{{-3.0, 0.0, 1.0}, {0.0, 1.0, 0.0}, {1.0, 0.0, 0.0}};
    CHECK(oracle_table == frozen);
    const GraphPolynomial g = cov_graph(kQ);
    CHECK(g.deg_z() == 2);
    CHECK(g.deg_w() == 2);
    CHECK(projective_gap(g, frozen) < 1e-15);
  }

  TEST_CASE("deleted covering of a quadratic polynomial is a(z + w) + b") {
    const cplx a(2.0, 1.0), b(-0.5, 3.0), c(4.0, 0.0);
    const GraphPolynomial g = cov_graph(RationalMap::polynomial(ComplexPolynomial{c, b, a}));
    CHECK(projective_gap(g, {{b, a}, {a, 0.0}}) < 1e-15);
  }

  TEST_CASE("deleted covering of a quadratic rational map has the Mobius pattern") {
    const cplx a(1.0, 2.0), b(-3.0, 0.5), c(0.25, 0.0), d(2.0, -1.0), e(0.0, 1.0), f(-1.5, 0.5);
    const RationalMap r(ComplexPolynomial{c, b, a}, ComplexPolynomial{f, e, d});
    const std::vector<std::vector<cplx>> expected{{b * f - c * e, a * f - c * d}, {a * f - c * d, a * e - b * d}};
    CHECK(projective_gap(cov_graph(r), expected) < 1e-14);
  }

  TEST_CASE("deleted covering agrees with the expansion oracle for random maps") {
    SplitMix64 rng(21);
    for (int trial = 0; trial < 40; ++trial) {
      const RationalMap r = random_map(rng, 2 + trial % 5);
      const auto t = oracle::deleted_covering_table(r.numerator().coefficients(), r.denominator().coefficients());
      CHECK(projective_gap(cov_graph(r), t) < 1e-12);
    }
    CHECK_THROWS_AS(cov_graph(RationalMap::polynomial(ComplexPolynomial{1.0, 2.0})), Error);
  }

  TEST_CASE("fibers of the deleted covering of Q") {
    const Correspondence c = cov_correspondence(kQ);
    const auto over2 = forward(c, pt(2.0)).multiset();
    REQUIRE(over2.size() == 1);
    CHECK(chordal_distance(over2[0].point, pt(-1.0)) < 1e-9);
    CHECK(over2[0].multiplicity == 2);
    // Q(2) = Q(-1) = 2.
    CHECK(rational_eval(kQ, pt(-1.0)) == pt(2.0));
    CHECK(c.d1() == 2);
    CHECK(c.d2() == 2);
  }

  TEST_CASE("deleted covering of z^2 is z -> -z") {
    const Correspondence c = cov_correspondence(RationalMap::polynomial(ComplexPolynomial{0.0, 0.0, 1.0}));
    SplitMix64 rng(22);
    for (int i = 0; i < 20; ++i) {
      const cplx z = oracle::random_complex(rng, 3.0);
      const auto f = forward(c, pt(z)).multiset();
      REQUIRE(f.size() == 1);
      CHECK(chordal_distance(f[0].point, pt(-z)) < 1e-12);
    }
  }

  TEST_CASE("deleted coverings are symmetric: backward equals forward") {
    SplitMix64 rng(23);
    for (int i = 0; i < 50; ++i) {
      const RationalMap r = random_map(rng, 2 + i % 4);
      const Correspondence c = cov_correspondence(r);
      const SpherePoint z = pt(oracle::random_complex(rng, 2.0));
      CHECK(same_fiber(forward(c, z).multiset(), backward(c, z).multiset(), 1e-9));
    }
  }

  TEST_CASE("fibers and the branch invariant for random maps") {
    SplitMix64 rng(24);
    for (int i = 0; i < 60; ++i) {
      const RationalMap r = random_map(rng, 2 + i % 4);
      const Correspondence c = cov_correspondence(r);
      const SpherePoint z = pt(oracle::random_complex(rng, 2.0));
      const FiberResult f = forward(c, z);
      CHECK(f.total_multiplicity() == r.degree() - 1);
      for (const auto& w : f.points) {
        CHECK(chordal_distance(rational_eval(r, w.point), rational_eval(r, z)) < 1e-7);
        CHECK(is_on_graph(c, z, w.point).on_graph);
        CHECK(is_on_graph(inverse(c), w.point, z).on_graph);
      }
    }
  }

  TEST_CASE("F_4 fibers at 1") {
    const Correspondence f = make_Fa(FamilyParameterA::make(4.0));
    CHECK(f.d1() == 2);
    CHECK(f.d2() == 2);
    // Cov^Q_0(1) = {1, -2}, then J_4(1) = 1 and J_4(-2) = 2.
    const auto fwd = forward(f, pt(1.0)).multiset();
    CHECK(total_multiplicity(fwd) == 2);
    CHECK(contains_point(fwd, pt(1.0), 1e-9));
    CHECK(contains_point(fwd, pt(2.0), 1e-9));
    const auto inv = forward(inverse(f), pt(1.0)).multiset();
    CHECK(same_fiber(inv, {{pt(1.0), 1}, {pt(-2.0), 1}}, 1e-9));
    CHECK(same_fiber(backward(f, pt(1.0)).multiset(), inv, 1e-12));
    // t = 1 is a double root of B(t, t) for the composed graph.
    const GraphPolynomial g = compose_graph_poly(Correspondence::from_mobius(make_Ja(FamilyParameterA::make(4.0))),
                                                 cov_correspondence(kQ));
    CHECK(diagonal_multiplicity(g, pt(1.0)) == 2);
    CHECK(is_on_graph(f, pt(1.0), pt(1.0)).on_graph);
  }

  TEST_CASE("graph of z^2 backward at 4") {
    const Correspondence c = Correspondence::from_rational_map(RationalMap::polynomial(ComplexPolynomial{0.0, 0.0, 1.0}));
    CHECK(same_fiber(backward(c, pt(4.0)).multiset(), {{pt(2.0), 1}, {pt(-2.0), 1}}, 1e-12));
    CHECK(c.d1() == 1);
    CHECK(c.d2() == 2);
  }

  TEST_CASE("composition bidegrees") {
    const auto a = FamilyParameterA::make(4.0);
    const Correspondence fa = compose(Correspondence::from_mobius(make_Ja(a)), cov_correspondence(kQ));
    CHECK(fa.d1() == 2);
    CHECK(fa.d2() == 2);
    const RationalMap s = precompose(kQ, MobiusMap(2.0, 1.0, 1.0, 3.0));
    const Correspondence rs = compose(cov_correspondence(kQ), cov_correspondence(s));
    CHECK(rs.d1() == 4);
    CHECK(rs.d2() == 4);
    const GraphPolynomial g = compose_graph_poly(cov_correspondence(kQ), cov_correspondence(s));
    CHECK(g.deg_z() == 4);
    CHECK(g.deg_w() == 4);
  }

  TEST_CASE("composing with the identity graph changes nothing") {
    const Correspondence c = make_Fa(FamilyParameterA::make(cplx(3.0, 1.0)));
    const Correspondence id = Correspondence::from_graph(GraphPolynomial::identity());
    const Correspondence left = compose(id, c), right = compose(c, id);
    SplitMix64 rng(25);
    for (int i = 0; i < 50; ++i) {
      const SpherePoint z = pt(oracle::random_complex(rng, 3.0));
      const auto base = forward(c, z).multiset();
      CHECK(same_fiber(forward(left, z).multiset(), base, 1e-10));
      CHECK(same_fiber(forward(right, z).multiset(), base, 1e-10));
    }
  }

  TEST_CASE("resultant of two Mobius graphs is the composed Mobius graph") {
    const MobiusMap m1(1.0, 2.0, -1.0, 3.0), m2(cplx(0.5, 1.0), -1.0, 2.0, 1.0);
    const GraphPolynomial g =
        compose_graph_poly(Correspondence::from_mobius(m1), Correspondence::from_mobius(m2));
    CHECK(projective_gap(g, table_of(GraphPolynomial::from_mobius(m1 * m2))) < 1e-10);
  }

  TEST_CASE("composed graph polynomial vanishes on chained fibers") {
    const auto a = FamilyParameterA::make(cplx(4.0, 0.5));
    const Correspondence j = Correspondence::from_mobius(make_Ja(a));
    const Correspondence cq = cov_correspondence(kQ);
    SplitMix64 rng(26);
    for (const auto& [outer, inner] : {std::pair{j, cq}, std::pair{cq, j}}) {
      const GraphPolynomial g = compose_graph_poly(outer, inner);
      const Correspondence chain = compose(outer, inner);
      for (int i = 0; i < 100; ++i) {
        const SpherePoint z = pt(oracle::random_complex(rng, 3.0));
        for (const auto& w : forward(chain, z).points) CHECK(g.scaled_residual(z, w.point) < 1e-6);
      }
    }
  }

  TEST_CASE("ramification of F_a and of Q") {
    for (double a : {4.0, 5.0, 10.0}) {
      const auto b1 = critical_values(make_Fa(FamilyParameterA::make(a)), 1);
      CHECK(contains_point(b1, SpherePoint::infinity(), 1e-6));
      CHECK(contains_point(b1, pt(-2.0), 1e-6));
      CHECK(contains_point(b1, pt(2.0), 1e-6));
    }
    const Ramification r = ramification(cov_correspondence(kQ));
    CHECK_FALSE(r.a2.empty());
    const std::vector<MultiPoint> crit = critical_points(kQ);
    for (const auto& [z, w] : r.a2) CHECK(contains_point(crit, z, 1e-6));
    CHECK(ramification(Correspondence::from_mobius(MobiusMap(1.0, 2.0, -1.0, 3.0))).a1.empty());
    CHECK(ramification(Correspondence::from_mobius(MobiusMap(1.0, 2.0, -1.0, 3.0))).a2.empty());
  }

  TEST_CASE("graph membership") {
    CHECK(is_on_graph(cov_correspondence(kQ), pt(2.0), pt(-1.0)).on_graph);
    const Correspondence p = cov_correspondence(RationalMap::polynomial(ComplexPolynomial{0.0, 0.0, 1.0}));
    SplitMix64 rng(27);
    for (int i = 0; i < 20; ++i) {
      const SpherePoint z = pt(0.2 + oracle::random_complex(rng, 3.0));
      CHECK_FALSE(is_on_graph(p, z, z).on_graph);
    }
  }

  TEST_CASE("inverse twice is the original correspondence") {
    const Correspondence c = make_Fa(FamilyParameterA::make(5.0));
    const Correspondence back = inverse(inverse(c));
    SplitMix64 rng(28);
    for (int i = 0; i < 30; ++i) {
      const SpherePoint z = pt(oracle::random_complex(rng, 3.0));
      CHECK(same_fiber(forward(back, z).multiset(), forward(c, z).multiset(), 1e-10));
    }
  }
}
