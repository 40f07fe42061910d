#include <cmath>
#include <numbers>

#include "corrdyn/error.hpp"
#include "corrdyn/family.hpp"
#include "corrdyn/measures.hpp"
#include "corrdyn/random.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace corrdyn;

namespace {

SpherePoint pt(cplx z) { return SpherePoint::from_complex(z); }
const RationalMap kZ2 = RationalMap::polynomial(ComplexPolynomial{0.0, 0.0, 1.0});

WeightedCloud atoms(std::vector<std::pair<cplx, double>> list) {
  WeightedCloud c;
  for (const auto& [z, w] : list) c.atoms.push_back({pt(z), w});
  c.atoms = merge_atoms(c.atoms);
  return c;
}

WeightedCloud circle_cloud(int n) {
  WeightedCloud c;
  for (int k = 0; k < n; ++k)
    c.atoms.push_back({pt(std::polar(1.0, 2.0 * std::numbers::pi * (k + 0.5) / n)), 1.0 / n});
  c.atoms = merge_atoms(c.atoms);
  return c;
}

// Direct double sum over atoms, no subsampling.
double energy_oracle(const WeightedCloud& a, const WeightedCloud& b) {
  const auto e = [](const WeightedCloud& x, const WeightedCloud& y) {
    double s = 0.0;
    for (const auto& p : x.atoms)
      for (const auto& q : y.atoms)
        s += p.weight * q.weight * oracle::chordal(p.point.to_complex(), q.point.to_complex());
    return s;
  };
  return 2.0 * e(a, b) - e(a, a) - e(b, b);
}

}  // namespace

TEST_SUITE("measures") {
  TEST_CASE("pullback at depth 0 is the Dirac mass") {
    const Correspondence f = make_Fa(FamilyParameterA::make(4.0));
    const WeightedCloud c = pullback_dirac_tree(f, pt(cplx(0.3, 0.2)), 0);
    REQUIRE(c.atoms.size() == 1);
    CHECK(c.atoms[0].point == pt(cplx(0.3, 0.2)));
    CHECK(c.atoms[0].weight == 1.0);
    const WeightedCloud m = pullback_dirac_mc(f, pt(-3.0), 0, 100, 5);
    REQUIRE(m.atoms.size() == 1);
    CHECK(m.atoms[0].weight == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("one backward step of F_4 from 1") {
    const WeightedCloud c = pullback_dirac_tree(make_Fa(FamilyParameterA::make(4.0)), pt(1.0), 1);
    REQUIRE(c.atoms.size() == 2);
    for (const auto& a : c.atoms) {
      CHECK(a.weight == doctest::Approx(0.5).epsilon(1e-15));
      CHECK((chordal_distance(a.point, pt(1.0)) < 1e-9 || chordal_distance(a.point, pt(-2.0)) < 1e-9));
    }
    CHECK(c.generation == 1);
    CHECK(c.provenance.method == "full_tree");
  }

  TEST_CASE("total mass stays 1") {
    SplitMix64 rng(41);
    for (int i = 0; i < 10; ++i) {
      const auto a = FamilyParameterA::make(2.0 + oracle::random_complex(rng, 6.0));
      const SpherePoint z = pt(oracle::random_complex(rng, 3.0));
      for (int n : {1, 4, 7}) {
        CHECK(std::abs(pullback_dirac_tree(make_Fa(a), z, n).total_weight() - 1.0) < 1e-12);
        CHECK(std::abs(pullback_dirac_mc(make_Fa(a), z, n, 200, 3).total_weight() - 1.0) < 1e-12);
      }
    }
  }

  TEST_CASE("the full tree refuses to exceed its budget") {
    PullbackOptions opt;
    opt.budget = 100;
    CHECK_THROWS_AS(pullback_dirac_tree(make_Fa(FamilyParameterA::make(4.0)), pt(0.3), 12, opt), Error);
  }

  TEST_CASE("Monte Carlo agrees with the full tree") {
    const Correspondence f = make_Fa(FamilyParameterA::make(4.0));
    const SpherePoint z = pt(cplx(0.3, 0.2));
    const WeightedCloud tree = pullback_dirac_tree(f, z, 10);
    const WeightedCloud mc = pullback_dirac_mc(f, z, 10, 10000, 7);
    CHECK(mc.provenance.rng_seed == 7);
    CHECK(energy_distance(mc, tree) < 0.05);
    const WeightedCloud a = pullback_dirac_mc(f, z, 12, 10000, 8);
    const WeightedCloud b = pullback_dirac_mc(f, z, 12, 10000, 9);
    CHECK(energy_distance(a, b) < 0.05);
  }

  TEST_CASE("pushforward by Mobius maps") {
    const WeightedCloud c = atoms({{0.5, 0.25}, {cplx(1.0, 2.0), 0.75}});
    const WeightedCloud same = pushforward_mobius(c, MobiusMap::identity());
    REQUIRE(same.atoms.size() == c.atoms.size());
    for (std::size_t i = 0; i < c.atoms.size(); ++i) CHECK(same.atoms[i].point == c.atoms[i].point);

    const MobiusMap j = make_Ja(FamilyParameterA::make(4.0));
    const WeightedCloud twice = pushforward_mobius(pushforward_mobius(c, j), j);
    REQUIRE(twice.atoms.size() == c.atoms.size());
    for (std::size_t i = 0; i < c.atoms.size(); ++i) {
      CHECK(chordal_distance(twice.atoms[i].point, c.atoms[i].point) < 1e-10);
      CHECK(twice.atoms[i].weight == c.atoms[i].weight);
    }
    const WeightedCloud one = pushforward_mobius(atoms({{1.0, 1.0}}), j);
    CHECK(chordal_distance(one.atoms.at(0).point, pt(1.0)) < 1e-12);
  }

  TEST_CASE("energy distance") {
    const WeightedCloud c = atoms({{0.5, 0.5}, {-2.0, 0.5}});
    CHECK(energy_distance(c, c) == doctest::Approx(0.0).epsilon(1e-15));
    WeightedCloud inf;
    inf.atoms = {{SpherePoint::infinity(), 1.0}};
    // Two antipodal atoms: 2 * 2 - 0 - 0.
    CHECK(energy_distance(atoms({{0.0, 1.0}}), inf) == doctest::Approx(4.0).epsilon(1e-15));
    SplitMix64 rng(42);
    for (int t = 0; t < 10; ++t) {
      std::vector<std::pair<cplx, double>> x, y;
      for (int i = 0; i < 30; ++i) x.emplace_back(oracle::random_complex(rng, 3.0), 1.0 / 30);
      for (int i = 0; i < 20; ++i) y.emplace_back(oracle::random_complex(rng, 3.0), 1.0 / 20);
      const WeightedCloud a = atoms(x), b = atoms(y);
      CHECK(energy_distance(a, b) == doctest::Approx(energy_oracle(a, b)).epsilon(1e-12));
      CHECK(energy_distance(a, b) >= 0.0);
    }
  }

  TEST_CASE("stratified subsample keeps mass") {
    const WeightedCloud c = circle_cloud(1000);
    const auto sub = stratified_subsample(c.atoms, 100);
    CHECK(sub.size() == 100);
    double mass = 0.0;
    for (const auto& a : sub) mass += a.weight;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(stratified_subsample(c.atoms, 5000).size() == c.atoms.size());
  }

  TEST_CASE("exceptional seeds") {
    const Correspondence f5 = make_Fa(FamilyParameterA::make(5.0));
    CHECK(is_exceptional_seed(f5, pt(-1.0)));
    CHECK(is_exceptional_seed(f5, pt(2.0)));
    CHECK_FALSE(is_exceptional_seed(f5, pt(cplx(0.3, 0.2))));
    CHECK_FALSE(is_exceptional_seed(make_Fa(FamilyParameterA::make(4.0)), pt(-1.0)));
    CHECK(is_exceptional_seed(Correspondence::from_rational_map(kZ2), pt(0.0)));
  }

  TEST_CASE("backward iteration of z^2 lands on the unit circle") {
    for (int n : {1, 5, 12}) {
      const WeightedCloud c = brolin_cloud(kZ2, pt(1.0), n, 500, 3);
      for (const auto& a : c.atoms) CHECK(std::abs(std::abs(a.point.to_complex()) - 1.0) < 1e-8);
    }
    const WeightedCloud deep = brolin_cloud(kZ2, pt(cplx(0.4, 0.3)), 12, 10000, 3);
    CHECK(energy_distance(deep, circle_cloud(4096)) < 0.05);
    CHECK_THROWS_AS(brolin_cloud(kZ2, pt(0.0), 5, 100, 1), Error);
  }

  TEST_CASE("backward iteration of P_A is seed independent") {
    const RationalMap pa = parabolic_PA(1.0);
    CHECK(pa.degree() == 2);
    const WeightedCloud a = brolin_cloud(pa, pt(cplx(0.3, 0.1)), 12, 10000, 3);
    const WeightedCloud b = brolin_cloud(pa, pt(cplx(-2.0, 1.0)), 12, 10000, 4);
    CHECK(energy_distance(a, b) < 0.05);
  }

  TEST_CASE("partition entropy") {
    const GridPartition two(1, 2);
    // Sector 0 holds arg in [0, pi), sector 1 the rest.
    CHECK(partition_entropy(atoms({{cplx(0.0, 1.0), 0.5}, {cplx(0.0, -1.0), 0.5}}), two) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(partition_entropy(atoms({{cplx(0.0, 1.0), 0.5}, {cplx(0.1, 2.0), 0.5}}), two) == 0.0);
    for (int k : {2, 5, 16, 64}) {
      const GridPartition part(1, k);
      WeightedCloud c;
      for (int s = 0; s < k; ++s)
        c.atoms.push_back({pt(std::polar(1.0, 2.0 * std::numbers::pi * (s + 0.5) / k)), 1.0 / k});
      CHECK(std::abs(partition_entropy(c, part) - std::log(static_cast<double>(k))) < 1e-12);
    }
    const GridPartition grid(4, 4);
    CHECK(grid.size() == 16);
    CHECK(grid.cell_of(pt(0.0)) < 4);
    CHECK(grid.cell_of(SpherePoint::infinity()) >= 12);
  }

  TEST_CASE("metric entropy of the identity vanishes") {
    const Correspondence id = Correspondence::from_graph(GraphPolynomial::identity());
    const WeightedCloud c = circle_cloud(256);
    const MetricEntropyResult r = metric_entropy_estimate(id, c, GridPartition(4, 4), 6);
    CHECK(std::abs(r.slope) < 1e-9);
    CHECK(r.joint_entropy.size() == 6);
  }

  TEST_CASE("metric entropy of z^2 with its backward-iteration cloud") {
    const Correspondence g = Correspondence::from_rational_map(kZ2);
    const WeightedCloud c = brolin_cloud(kZ2, pt(1.0), 12, 10000, 3);
    const GridPartition part(1, 16);
    const MetricEntropyResult r = metric_entropy_estimate(g, c, part, 8);
    CHECK(r.slope >= 0.45);
    CHECK(r.slope <= 0.80);
    CHECK(r.slope <= std::log(16.0));
    for (double h : r.joint_entropy) CHECK(h <= std::log(16.0) * 8 + 1e-12);
    CHECK(r.joint_entropy.front() <= std::log(16.0) + 1e-12);
  }
}
