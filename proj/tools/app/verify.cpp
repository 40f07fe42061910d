// Invariant suites behind `corrdyn verify`.  Each check records the worst
// observed error and the input that produced it.

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <sstream>

#include "app.hpp"
#include "corrdyn/error.hpp"
#include "corrdyn/family.hpp"
#include "corrdyn/graph_polynomial.hpp"
#include "corrdyn/io.hpp"
#include "corrdyn/limitset.hpp"
#include "corrdyn/measures.hpp"
#include "corrdyn/random.hpp"

namespace corrdyn::app {

namespace fs = std::filesystem;

namespace {

struct Check {
  std::string name;
  double tolerance = 0.0;
  double worst = 0.0;
  std::string witness;
  bool failed_hard = false;

  // Records a measured error; larger errors replace the witness.
  void observe(double error, const std::string& input) {
    if (std::isnan(error)) error = INFINITY;
    if (witness.empty() || error > worst) {
      worst = error;
      witness = input;
    }
  }
  void fail(const std::string& input) {
    if (!failed_hard) witness = input;
    failed_hard = true;
  }
  bool passed() const { return !failed_hard && worst <= tolerance; }
  json to_json() const {
    return {{"name", name}, {"passed", passed()}, {"worst", worst}, {"tolerance", tolerance}, {"witness", witness}};
  }
};

struct Suite {
  std::string module;
  // Stable addresses: callers hold references returned by add().
  std::deque<Check> checks;

  Check& add(std::string name, double tolerance) {
    checks.push_back({std::move(name), tolerance, 0.0, {}, false});
    return checks.back();
  }
  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed(); });
  }
  json to_json() const {
    json list = json::array();
    for (const auto& c : checks) list.push_back(c.to_json());
    return {{"module", module}, {"passed", passed()}, {"checks", list}};
  }
};

std::string str(cplx z) {
  std::ostringstream s;
  s.precision(17);
  s << z;
  return s.str();
}

std::string str(const SpherePoint& p) { return p.is_infinity() ? "inf" : str(p.to_complex()); }

cplx random_complex(SplitMix64& rng, double radius) {
  const double r = radius * std::sqrt(rng.uniform());
  return std::polar(r, 2.0 * std::numbers::pi * rng.uniform());
}

ComplexPolynomial random_poly(SplitMix64& rng, int degree) {
  std::vector<cplx> c;
  for (int k = 0; k <= degree; ++k) c.push_back(random_complex(rng, 2.0));
  if (std::abs(c.back()) < 0.1) c.back() = 1.0;
  return ComplexPolynomial(std::move(c));
}

RationalMap random_map(SplitMix64& rng, int degree) {
  for (;;) {
    try {
      return RationalMap(random_poly(rng, degree), random_poly(rng, degree - 1));
    } catch (const Error&) {
      // Common root; draw again.
    }
  }
}

std::string describe(const RationalMap& r) { return io::rational_map_to_json(r); }

double sphere_dist_to_set(const SpherePoint& p, const std::vector<MultiPoint>& set) {
  double best = INFINITY;
  for (const auto& q : set) best = std::min(best, chordal_distance(p, q.point));
  return best;
}

Suite sphere_suite(SplitMix64 rng, int samples) {
  Suite s{"sphere_numerics", {}};
  auto& chart = s.add("embedding round trip", 1e-12);
  auto& tri = s.add("chordal triangle inequality", 1e-15);
  auto& roots = s.add("root backward error", 1e-10);
  auto& crit = s.add("critical points count 2d-2", 0.0);
  auto& mob = s.add("Mobius inverse", 1e-10);
  for (int i = 0; i < samples; ++i) {
    const cplx z = random_complex(rng, i % 2 ? 1e3 : 2.0);
    const SpherePoint p = SpherePoint::from_complex(z);
    chart.observe(chordal_distance(p, SpherePoint::from_embedding(p.embed())), str(z));
    const SpherePoint q = SpherePoint::from_complex(random_complex(rng, 3.0));
    const SpherePoint r = SpherePoint::from_complex(random_complex(rng, 3.0));
    tri.observe(chordal_distance(p, r) - chordal_distance(p, q) - chordal_distance(q, r),
                str(p) + " " + str(q) + " " + str(r));

    const int degree = 2 + i % 7;
    const ComplexPolynomial poly = random_poly(rng, degree);
    const auto rs = poly_roots(poly);
    if (total_multiplicity(rs) != degree) roots.fail(io::polynomial_to_json(poly));
    for (const auto& root : rs) {
      if (root.point.chart() != Chart::Standard) continue;
      const cplx x = root.point.value();
      roots.observe(std::abs(poly(x)) / poly.magnitude_at(x), io::polynomial_to_json(poly));
    }

    const RationalMap f = random_map(rng, 2 + i % 4);
    const int total = total_multiplicity(critical_points(f));
    crit.observe(std::abs(total - (2 * f.degree() - 2)), describe(f));

    const MobiusMap m(random_complex(rng, 2.0), random_complex(rng, 2.0), random_complex(rng, 2.0),
                      random_complex(rng, 2.0) + 3.0);
    mob.observe(chordal_distance(mobius_apply(m.inverse() * m, p), p), io::mobius_to_json(m) + " at " + str(p));
  }
  return s;
}

Suite correspondence_suite(SplitMix64 rng, int samples) {
  Suite s{"correspondence_core", {}};
  auto& sym = s.add("deleted covering graph symmetric", 1e-12);
  auto& count = s.add("fiber multiplicity deg-1", 0.0);
  auto& branch = s.add("branch invariant R(w)=R(z)", 1e-7);
  auto& inv = s.add("w in F(z) iff z in F^-1(w)", 1e-8);
  auto& comp = s.add("chained fiber bidegree", 0.0);
  for (int i = 0; i < samples; ++i) {
    const RationalMap r = random_map(rng, 2 + i % 3);
    const GraphPolynomial g = cov_graph(r);
    double asym = 0.0;
    for (int a = 0; a <= g.deg_z(); ++a)
      for (int b = 0; b <= g.deg_w(); ++b)
        asym = std::max(asym, std::abs(g.coeff(a, b) - g.coeff(b, a)) / g.coefficient_norm());
    sym.observe(asym, describe(r));

    const Correspondence c = cov_correspondence(r);
    const SpherePoint z = SpherePoint::from_complex(random_complex(rng, 2.0));
    const FiberResult fib = forward(c, z);
    count.observe(std::abs(fib.total_multiplicity() - (r.degree() - 1)), describe(r) + " at " + str(z));
    const Correspondence ci = inverse(c);
    for (const auto& w : fib.points) {
      branch.observe(chordal_distance(rational_eval(r, w.point), rational_eval(r, z)), describe(r) + " at " + str(z));
      inv.observe(is_on_graph(ci, w.point, z).residual, describe(r) + " at " + str(z));
    }

    const RationalMap r2 = random_map(rng, 2 + (i + 1) % 3);
    const Correspondence both = compose(cov_correspondence(r2), c);
    const int expected = (r.degree() - 1) * (r2.degree() - 1);
    comp.observe(std::abs(both.d1() - expected) + std::abs(forward(both, z).total_multiplicity() - expected),
                 describe(r) + " then " + describe(r2));
  }
  return s;
}

Suite family_suite(SplitMix64 rng, int samples, std::uint64_t seed) {
  Suite s{"family_gallery", {}};
  auto& invol = s.add("J_a is an involution", 0.0);
  auto& round = s.add("involution round trip", 1e-9);
  auto& fixed = s.add("backward(F_a, 1) contains 1 and -2", 1e-9);
  auto& bideg = s.add("F_a bidegree (2:2)", 0.0);
  for (int i = 0; i < samples; ++i) {
    cplx a = random_complex(rng, 10.0);
    if (std::abs(a - 1.0) < 0.1) a += 0.5;
    const auto pa = FamilyParameterA::make(a);
    const MobiusMap j = make_Ja(pa);
    invol.observe(mobius_is_involution(j) ? 0.0 : 1.0, str(a));
    const MobiusMap back = quadratic_to_involution(involution_to_quadratic(j));
    const SpherePoint p = SpherePoint::from_complex(random_complex(rng, 3.0));
    round.observe(chordal_distance(mobius_apply(back, p), mobius_apply(j, p)), str(a) + " at " + str(p));

    const Correspondence f = make_Fa(pa);
    bideg.observe(std::abs(f.d1() - 2) + std::abs(f.d2() - 2), str(a));
    const auto pre = backward(f, SpherePoint::from_complex(1.0)).multiset();
    fixed.observe(std::max(sphere_dist_to_set(SpherePoint::from_complex(1.0), pre),
                           sphere_dist_to_set(SpherePoint::from_complex(-2.0), pre)),
                  str(a));
  }
  auto& klein = s.add("Klein pair for a = 4", 0.0);
  KleinOptions opt;
  opt.n_samples = 20 * samples;
  opt.rng_seed = seed;
  opt.punctures = {SpherePoint::from_complex(1.0)};
  const KleinReport k =
      klein_pair_check(Correspondence::from_mobius(make_Ja(FamilyParameterA::make(4.0))),
                       RegionSpec::complement(2.5, 1.5), cov_correspondence(cubic_Q()), RegionSpec::disk(3.5, 2.5), opt);
  klein.observe(static_cast<double>(k.violation_count + k.uncovered_count),
                k.passed() ? "no violations" : io::klein_report_to_json(k));
  return s;
}

// One atom at the center of every cell, equal weights.
WeightedCloud cell_centers(const GridPartition& part) {
  WeightedCloud cloud;
  const double w = 1.0 / part.size();
  for (int b = 0; b < part.bands(); ++b)
    for (int k = 0; k < part.sectors(); ++k) {
      const double h = -1.0 + (2.0 * b + 1.0) / part.bands();
      const double t = 2.0 * std::numbers::pi * (k + 0.5) / part.sectors();
      const double rho = std::sqrt(1.0 - h * h);
      cloud.atoms.push_back({SpherePoint::from_embedding({rho * std::cos(t), rho * std::sin(t), h}), w});
    }
  return cloud;
}

Suite measures_suite(SplitMix64 rng, int samples, std::uint64_t seed) {
  Suite s{"measures", {}};
  auto& mass = s.add("pullback mass is 1", 1e-12);
  auto& self = s.add("energy distance to itself", 1e-12);
  auto& uniform = s.add("partition entropy of uniform split is log k", 1e-12);
  auto& mc = s.add("Monte Carlo clouds reproducible", 0.0);
  const Correspondence f = make_Fa(FamilyParameterA::make(4.0));
  for (int i = 0; i < std::max(1, samples / 10); ++i) {
    const SpherePoint z = SpherePoint::from_complex(random_complex(rng, 2.0));
    const WeightedCloud cloud = pullback_dirac_tree(f, z, 6);
    mass.observe(std::abs(cloud.total_weight() - 1.0), str(z));
    self.observe(std::abs(energy_distance(cloud, cloud)), str(z));
    const WeightedCloud m1 = pullback_dirac_mc(f, z, 6, 64, seed + i);
    const WeightedCloud m2 = pullback_dirac_mc(f, z, 6, 64, seed + i);
    bool same = m1.atoms.size() == m2.atoms.size();
    for (std::size_t k = 0; same && k < m1.atoms.size(); ++k)
      same = m1.atoms[k].point == m2.atoms[k].point && m1.atoms[k].weight == m2.atoms[k].weight;
    mc.observe(same ? 0.0 : 1.0, str(z));
  }
  for (const auto& [b, k] : {std::pair{1, 16}, {4, 4}, {2, 8}, {3, 5}}) {
    const GridPartition part(b, k);
    const double h = partition_entropy(cell_centers(part), part);
    uniform.observe(std::abs(h - std::log(static_cast<double>(part.size()))),
                    std::to_string(b) + "x" + std::to_string(k));
  }
  return s;
}

Suite entropy_suite() {
  Suite s{"entropy_estimators", {}};
  auto& mono = s.add("counts non-increasing in eps", 0.0);
  auto& ds = s.add("DS count >= KT count", 0.0);
  auto& cap = s.add("estimate within cap + 0.05", 0.0);
  auto& coarse = s.add("eps > 2 gives one class", 0.0);
  EntropyProtocol p;
  p.eps_grid = {0.4, 0.2};
  p.n_max = 5;
  p.seed_net = 16;
  p.max_seeds = 1 << 14;
  const std::vector<std::pair<std::string, Correspondence>> cases{
      {"z^2", Correspondence::from_rational_map(RationalMap::polynomial(ComplexPolynomial{0.0, 0.0, 1.0}))},
      {"F_4", make_Fa(FamilyParameterA::make(4.0))}};
  for (const auto& [name, c] : cases) {
    const EntropyEstimate e = entropy_estimate(c, p);
    for (const auto& a : e.kt.counts)
      for (const auto& b : e.kt.counts)
        if (a.n == b.n && a.eps > b.eps && a.count > b.count)
          mono.observe(static_cast<double>(a.count - b.count),
                       name + " n=" + std::to_string(a.n) + " eps=" + std::to_string(a.eps));
    for (std::size_t i = 0; i < e.kt.counts.size() && i < e.ds.counts.size(); ++i)
      if (e.ds.counts[i].count < e.kt.counts[i].count)
        ds.observe(static_cast<double>(e.kt.counts[i].count - e.ds.counts[i].count),
                   name + " n=" + std::to_string(e.kt.counts[i].n));
    cap.observe(std::max(0.0, e.kt.estimate - e.kt.cap - 0.05), name + " KT estimate " + std::to_string(e.kt.estimate));

    const auto orbits = enumerate_orbits(c, equal_area_net(4), 3, std::size_t{1} << 16);
    coarse.observe(std::abs(separated_count_KT(orbits.orbits, 2.5) - 1), name);
  }
  return s;
}

Suite io_suite(SplitMix64 rng, const fs::path& scratch) {
  Suite s{"cli_harness", {}};
  auto& text = s.add("JSON formats round trip", 0.0);
  auto& cloud_rt = s.add("cloud CSV round trip", 0.0);
  auto& ppm = s.add("PPM round trip", 0.0);

  const auto same_text = [&](const std::string& a, const std::string& b, const std::string& what) {
    text.observe(a == b ? 0.0 : 1.0, what);
  };
  for (int i = 0; i < 8; ++i) {
    const SpherePoint p = SpherePoint::from_complex(random_complex(rng, i % 2 ? 50.0 : 1.0));
    if (!(io::point_from_json(io::point_to_json(p)) == p)) text.observe(1.0, "point " + str(p));
    const RationalMap r = random_map(rng, 2 + i % 3);
    same_text(io::rational_map_to_json(io::rational_map_from_json(io::rational_map_to_json(r))),
              io::rational_map_to_json(r), "rational map " + describe(r));
    const GraphPolynomial g = cov_graph(r);
    if (!(io::graph_polynomial_from_json(io::graph_polynomial_to_json(g)) == g))
      text.observe(1.0, "graph of " + describe(r));
  }
  const Correspondence f = make_Fa(FamilyParameterA::make(cplx(4.0, 0.5)));
  same_text(io::correspondence_to_json(io::correspondence_from_json(io::correspondence_to_json(f))),
            io::correspondence_to_json(f), "F_a correspondence");
  for (const RegionSpec& r : {RegionSpec::disk(cplx(0.5, 1.0), 2.0), RegionSpec::complement(3.5, 1.25),
                              RegionSpec::half_plane(cplx(0.0, 1.0), cplx(1.0, -1.0))})
    same_text(io::region_to_json(io::region_from_json(io::region_to_json(r))), io::region_to_json(r), "region");
  EntropyReport report;
  report.variant = "DS";
  report.counts = {{1, 0.2, 17}, {2, 0.2, 33}};
  report.slopes = {{0.2, 0.6931471805599453, 1, 2}};
  report.estimate = 0.6931471805599453;
  report.cap = std::log(2.0);
  report.flags = {"fit window too short eps=0.2"};
  same_text(io::entropy_report_to_json(io::entropy_report_from_json(io::entropy_report_to_json(report))),
            io::entropy_report_to_json(report), "entropy report");

  fs::create_directories(scratch);
  const WeightedCloud cloud = pullback_dirac_tree(f, SpherePoint::from_complex(cplx(0.3, 0.2)), 5);
  io::write_cloud(scratch / "cloud.csv", cloud);
  const WeightedCloud back = io::read_cloud(scratch / "cloud.csv");
  bool same = back.atoms.size() == cloud.atoms.size() && back.generation == cloud.generation &&
              back.provenance.seed == cloud.provenance.seed &&
              back.provenance.correspondence_id == cloud.provenance.correspondence_id;
  for (std::size_t k = 0; same && k < cloud.atoms.size(); ++k)
    same = back.atoms[k].point == cloud.atoms[k].point && back.atoms[k].weight == cloud.atoms[k].weight;
  cloud_rt.observe(same ? 0.0 : 1.0, "pullback cloud of F_a, 5 levels");

  RasterImage image(7, 5, Viewport{Chart::Reciprocal, cplx(0.25, -0.5), 1.5});
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) image.pixel(x, y)[(x + y) % 3] = static_cast<std::uint8_t>(17 * x + y);
  io::write_ppm(scratch / "image.ppm", image);
  ppm.observe(io::read_ppm(scratch / "image.ppm") == image ? 0.0 : 1.0, "7x5 test pattern");
  fs::remove_all(scratch);
  return s;
}

}  // namespace

json cmd_verify(const json& config, const RunContext& ctx) {
  if (!config.contains("rng_seed")) throw UsageError("verify draws random inputs and needs \"rng_seed\"");
  const auto seed = config.at("rng_seed").get<std::uint64_t>();
  const int samples = config.value("samples", 40);
  if (samples < 1) throw UsageError("verify samples must be positive");

  std::vector<Suite> suites;
  suites.push_back(sphere_suite(SplitMix64(seed, 1), samples));
  suites.push_back(correspondence_suite(SplitMix64(seed, 2), samples));
  suites.push_back(family_suite(SplitMix64(seed, 3), samples, seed));
  suites.push_back(measures_suite(SplitMix64(seed, 4), samples, seed));
  suites.push_back(entropy_suite());
  suites.push_back(io_suite(SplitMix64(seed, 6), ctx.resolve("verify_scratch")));

  bool passed = true;
  json list = json::array();
  json failing = json::array();
  for (const auto& s : suites) {
    passed = passed && s.passed();
    list.push_back(s.to_json());
    for (const auto& c : s.checks)
      if (!c.passed()) failing.push_back(s.module + ": " + c.name);
  }
  const json report{{"rng_seed", seed}, {"samples", samples}, {"passed", passed}, {"suites", list}};
  const fs::path out = ctx.resolve(config.value("out", std::string("verify.json")));
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  io::write_text_file(out, report.dump(2) + "\n");
  return {{"command", "verify"}, {"passed", passed}, {"failing", failing}, {"out", out.string()}};
}

}  // namespace corrdyn::app
