#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "app/app.hpp"
#include "corrdyn/error.hpp"
#include "corrdyn/family.hpp"
#include "corrdyn/io.hpp"
#include "corrdyn/limitset.hpp"
#include "corrdyn/random.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace corrdyn;
namespace fs = std::filesystem;

namespace {

SpherePoint pt(cplx z) { return SpherePoint::from_complex(z); }

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("corrdyn_test_io_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
  std::string stderr_text;
};

RunResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string(CORRDYN_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.stdout_text = io::read_text_file(out);
  r.stderr_text = io::read_text_file(err);
  return r;
}

std::string config(const std::string& name) { return std::string(CORRDYN_CONFIG_DIR) + "/" + name; }

}  // namespace

TEST_SUITE("cli_harness") {
  TEST_CASE("points round trip in both charts") {
    SplitMix64 rng(61);
    for (int i = 0; i < 200; ++i) {
      const SpherePoint p = pt(oracle::random_complex(rng, i % 2 ? 1e6 : 1.0));
      CHECK(io::point_from_json(io::point_to_json(p)) == p);
    }
    CHECK(io::point_from_json(io::point_to_json(SpherePoint::infinity())) == SpherePoint::infinity());
    CHECK(io::point_from_json("\"inf\"") == SpherePoint::infinity());
    CHECK(io::point_to_json(SpherePoint::infinity()) == "[0.0,0.0,\"reciprocal\"]");
  }

  TEST_CASE("maps and graphs round trip") {
    SplitMix64 rng(62);
    for (int i = 0; i < 30; ++i) {
      std::vector<cplx> p, q;
      for (int k = 0; k <= 2 + i % 3; ++k) p.push_back(oracle::random_complex(rng, 2.0));
      for (int k = 0; k <= 1 + i % 3; ++k) q.push_back(oracle::random_complex(rng, 2.0));
      const RationalMap r{ComplexPolynomial(p), ComplexPolynomial(q)};
      const RationalMap back = io::rational_map_from_json(io::rational_map_to_json(r));
      CHECK(back.numerator() == r.numerator());
      CHECK(back.denominator() == r.denominator());
      CHECK(io::polynomial_from_json(io::polynomial_to_json(r.numerator())) == r.numerator());
      const GraphPolynomial g = cov_graph(r);
      CHECK(io::graph_polynomial_from_json(io::graph_polynomial_to_json(g)) == g);
    }
  }

  TEST_CASE("correspondences round trip") {
    const RationalMap s = precompose(cubic_Q(), MobiusMap(2.0, 1.0, 1.0, 3.0));
    for (const Correspondence& c :
         {make_Fa(FamilyParameterA::make(cplx(4.0, 0.5))), make_FRS(cubic_Q(), s),
          inverse(make_Fa(FamilyParameterA::make(5.0))), cov_correspondence(cubic_Q(), "cov")}) {
      const std::string text = io::correspondence_to_json(c);
      const Correspondence back = io::correspondence_from_json(text);
      CHECK(io::correspondence_to_json(back) == text);
      CHECK(back.d1() == c.d1());
      CHECK(back.d2() == c.d2());
      CHECK(back.name() == c.name());
    }
    CHECK_THROWS_AS(io::correspondence_from_json(R"({"name":"x","components":[],"chain":[],"d1":1,"d2":1})"), Error);
  }

  TEST_CASE("regions and entropy reports round trip") {
    for (const RegionSpec& r : {RegionSpec::disk(cplx(0.5, 1.0), 2.0), RegionSpec::complement(3.5, 2.304),
                                RegionSpec::half_plane(cplx(0.0, 1.0), cplx(1.0, -1.0))}) {
      const std::string text = io::region_to_json(r);
      CHECK(io::region_to_json(io::region_from_json(text)) == text);
    }
    EntropyReport rep;
    rep.variant = "KT";
    rep.counts = {{1, 0.2, 40}, {2, 0.2, 77}, {1, 0.1, 160}};
    rep.slopes = {{0.2, 0.6545, 1, 2}};
    rep.estimate = 0.6545;
    rep.cap = std::log(2.0);
    rep.flags = {"budget reached at n=3 eps=0.2"};
    rep.nodes_used = 12345;
    rep.seeds_used = 64;
    const std::string text = io::entropy_report_to_json(rep);
    const EntropyReport back = io::entropy_report_from_json(text);
    CHECK(io::entropy_report_to_json(back) == text);
    CHECK(back.cap == rep.cap);
    CHECK(back.counts.size() == 3);
    CHECK_THROWS_AS(io::entropy_report_from_json(R"({"variant":"XX"})"), Error);
  }

  TEST_CASE("malformed input raises parse errors") {
    for (const char* bad : {"[1,", "{\"num\": 3}", "[1, 2, \"sideways\"]", "{}"}) {
      bool parse_error = false;
      try {
        io::rational_map_from_json(bad);
      } catch (const Error& e) {
        parse_error = e.code() == ErrorCode::ParseError;
      }
      CHECK(parse_error);
    }
    CHECK_THROWS_AS(io::point_from_json("[1]"), Error);
    CHECK_THROWS_AS(io::region_from_json(R"({"kind":"triangle"})"), Error);
  }

  TEST_CASE("clouds round trip through CSV and sidecar") {
    const fs::path dir = scratch_dir("cloud");
    const WeightedCloud cloud = pullback_dirac_mc(make_Fa(FamilyParameterA::make(4.0)), pt(cplx(0.3, 0.2)), 8, 300, 17);
    io::write_cloud(dir / "c.csv", cloud);
    CHECK(fs::exists(dir / "c.json"));
    const WeightedCloud back = io::read_cloud(dir / "c.csv");
    REQUIRE(back.atoms.size() == cloud.atoms.size());
    for (std::size_t i = 0; i < cloud.atoms.size(); ++i) {
      CHECK(back.atoms[i].point == cloud.atoms[i].point);
      CHECK(back.atoms[i].weight == cloud.atoms[i].weight);
    }
    CHECK(back.generation == 8);
    CHECK(back.provenance.method == "monte_carlo");
    CHECK(back.provenance.rng_seed == 17);
    CHECK(back.provenance.seed == cloud.provenance.seed);
    CHECK(io::read_text_file(dir / "c.csv").rfind("re,im,chart,weight\n", 0) == 0);
  }

  TEST_CASE("PPM round trip") {
    const fs::path dir = scratch_dir("ppm");
    RasterImage img(9, 4, Viewport{Chart::Standard, cplx(-0.5, 0.25), 1.75});
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) img.pixel(x, y)[y % 3] = static_cast<std::uint8_t>(x * 25 + y);
    io::write_ppm(dir / "a.ppm", img);
    CHECK(io::read_ppm(dir / "a.ppm") == img);
    CHECK(io::read_text_file(dir / "a.ppm").rfind("P6\n", 0) == 0);
    io::write_text_file(dir / "bad.ppm", "P3\n1 1\n255\n0 0 0\n");
    CHECK_THROWS_AS(io::read_ppm(dir / "bad.ppm"), Error);
    CHECK_THROWS_AS(RasterImage(0, 5, Viewport{}), Error);
  }

  TEST_CASE("limit set of z^2 in the unit disk traces the unit circle") {
    const Correspondence z2 = Correspondence::from_rational_map(RationalMap::polynomial(ComplexPolynomial{0.0, 0.0, 1.0}));
    const int n = 200;
    const Viewport view{Chart::Standard, 0.0, 1.5};
    const LimitSetResult res = rasterize_limit_set(z2, RegionSpec::disk(0.0, 1.0), n, n, view);
    CHECK(res.undecided == 0);
    const double pixel = 2.0 * view.half_width / n;
    std::vector<cplx> boundary;
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        if (!res.image.is_marked(x, y)) continue;
        const bool edge = x == 0 || y == 0 || x == n - 1 || y == n - 1 || !res.image.is_marked(x - 1, y) ||
                          !res.image.is_marked(x + 1, y) || !res.image.is_marked(x, y - 1) ||
                          !res.image.is_marked(x, y + 1);
        if (edge) boundary.push_back(res.image.point_at(x, y).to_complex());
      }
    REQUIRE(!boundary.empty());
    double out_dev = 0.0;
    for (const cplx& b : boundary) out_dev = std::max(out_dev, std::abs(std::abs(b) - 1.0) / pixel);
    double in_dev = 0.0;
    for (int k = 0; k < 720; ++k) {
      const cplx c = std::polar(1.0, 2.0 * M_PI * k / 720.0);
      double best = INFINITY;
      for (const cplx& b : boundary) best = std::min(best, std::abs(b - c));
      in_dev = std::max(in_dev, best / pixel);
    }
    CHECK(std::max(out_dev, in_dev) < 2.0);
  }

  TEST_CASE("limit set rasters do not depend on the thread count") {
    const Correspondence f = make_Fa(FamilyParameterA::make(4.0));
    const Viewport view{Chart::Standard, cplx(2.0, 0.0), 2.0};
    ::setenv("CORRDYN_THREADS", "1", 1);
    const LimitSetResult one = rasterize_limit_set(f, RegionSpec::disk(3.5, 2.5), 48, 32, view, {10, 512, 1e-12});
    ::setenv("CORRDYN_THREADS", "4", 1);
    const LimitSetResult four = rasterize_limit_set(f, RegionSpec::disk(3.5, 2.5), 48, 32, view, {10, 512, 1e-12});
    ::unsetenv("CORRDYN_THREADS");
    CHECK(one.image == four.image);
    CHECK(one.marked == four.marked);
  }

  TEST_CASE("config overrides") {
    app::json c = app::json::parse(R"({"protocol": {"n_max": 12}, "name": "x"})");
    app::apply_override(c, "protocol.n_max=6");
    app::apply_override(c, "protocol.eps_grid=[0.3,0.1]");
    app::apply_override(c, "outputs.kt=out/kt.json");
    app::apply_override(c, "name=plain text");
    CHECK(c["protocol"]["n_max"] == 6);
    CHECK(c["protocol"]["eps_grid"].size() == 2);
    CHECK(c["outputs"]["kt"] == "out/kt.json");
    CHECK(c["name"] == "plain text");
    CHECK_THROWS_AS(app::apply_override(c, "no_equals_sign"), app::UsageError);
    CHECK_THROWS_AS(app::apply_override(c, "name.deeper=1"), app::UsageError);
    const EntropyProtocol p = app::protocol_from_config(c["protocol"]);
    CHECK(p.n_max == 6);
    CHECK(p.eps_grid == std::vector<double>{0.3, 0.1});
  }

  TEST_CASE("correspondences from configs") {
    const Correspondence frs = app::correspondence_from_config(app::json::parse(R"({
      "family": "F_RS", "R": {"num": [0, -3, 0, 1]},
      "S": {"num": [0, -3, 0, 1], "precompose": {"a": 2, "b": 1, "c": 1, "d": 3}}})"));
    CHECK(frs.d1() == 4);
    const Correspondence inv =
        app::correspondence_from_config(app::json::parse(R"({"family": "inverse", "of": {"family": "F_a", "a": 4}})"));
    CHECK(inv.name() == "F_a^-1");
    CHECK_THROWS_AS(app::correspondence_from_config(app::json::parse(R"({"family": "nope"})")), app::UsageError);
    CHECK_THROWS_AS(app::correspondence_from_config(app::json::parse(R"({"family": "F_a"})")), app::UsageError);
  }

  TEST_CASE("cov command writes the deleted covering graph") {
    const fs::path dir = scratch_dir("cov");
    const RunResult r = run_cli("cov --config " + config("cov_Q.json") + " --output-dir " + dir.string(), dir);
    CHECK(r.exit_code == 0);
    CHECK(r.stdout_text.find("\"bidegree\"") != std::string::npos);
    const GraphPolynomial g = io::graph_polynomial_from_json(io::read_text_file(dir / "results/cov_Q.json"));
    REQUIRE(g.deg_z() == 2);
    const cplx s = g.coeff(1, 1);
    CHECK(std::abs(g.coeff(0, 0) / s + 3.0) < 1e-14);
    CHECK(std::abs(g.coeff(2, 0) / s - 1.0) < 1e-14);
    CHECK(std::abs(g.coeff(0, 2) / s - 1.0) < 1e-14);
    CHECK(std::abs(g.coeff(1, 0)) < 1e-14);

    // A quadratic rational map gives a Mobius graph.
    const RunResult q = run_cli("cov --config " + config("cov_Q.json") + " --output-dir " + dir.string() +
                                    " --set 'map={\"num\":[1,2,3],\"den\":[0,1,1]}' --set out=quad.json",
                                dir);
    CHECK(q.exit_code == 0);
    const GraphPolynomial m = io::graph_polynomial_from_json(io::read_text_file(dir / "quad.json"));
    CHECK(m.deg_z() == 1);
    CHECK(m.deg_w() == 1);

    const RunResult low =
        run_cli("cov --config " + config("cov_Q.json") + " --output-dir " + dir.string() + " --set map.num=[1,2]", dir);
    CHECK(low.exit_code == 1);
    CHECK(low.stderr_text.find("DegreeTooLow") != std::string::npos);
  }

  TEST_CASE("usage errors exit with code 2") {
    const fs::path dir = scratch_dir("usage");
    CHECK(run_cli("", dir).exit_code == 2);
    CHECK(run_cli("nonsense --config x.json", dir).exit_code == 2);
    CHECK(run_cli("cov", dir).exit_code == 2);
    CHECK(run_cli("cov --config " + (dir / "missing.json").string(), dir).exit_code == 2);
    io::write_text_file(dir / "broken.json", "{ not json");
    CHECK(run_cli("cov --config " + (dir / "broken.json").string(), dir).exit_code == 2);
    io::write_text_file(dir / "badmap.json", R"({"map": {"num": "z^3"}, "out": "x.json"})");
    CHECK(run_cli("cov --config " + (dir / "badmap.json").string() + " --output-dir " + dir.string(), dir).exit_code ==
          2);
    const RunResult seedless = run_cli("equidist --config " + config("equidist_a4.json") + " --output-dir " +
                                           dir.string() + " --set method=monte_carlo --set n_paths=100",
                                       dir);
    CHECK(seedless.exit_code == 2);
    CHECK(seedless.stderr_text.find("rng_seed") != std::string::npos);
  }

  TEST_CASE("equidist rejects exceptional seeds") {
    const fs::path dir = scratch_dir("exceptional");
    const RunResult r =
        run_cli("equidist --config " + config("equidist_a5_exceptional.json") + " --output-dir " + dir.string(), dir);
    CHECK(r.exit_code == 1);
    CHECK(r.stderr_text.find("E_a") != std::string::npos);
  }

  TEST_CASE("limitset and orbit commands") {
    const fs::path dir = scratch_dir("limitset");
    const RunResult r = run_cli("limitset --config " + config("limitset_z2.json") + " --output-dir " + dir.string() +
                                    " --set width=64 --set height=48",
                                dir);
    CHECK(r.exit_code == 0);
    const RasterImage img = io::read_ppm(dir / "results/limitset_z2.ppm");
    CHECK(img.width == 64);
    CHECK(img.height == 48);
    CHECK(img.is_marked(32, 24));
    CHECK_FALSE(img.is_marked(0, 0));

    const RunResult o = run_cli("orbit --config " + config("orbit_F4.json") + " --output-dir " + dir.string(), dir);
    CHECK(o.exit_code == 0);
    const auto doc = app::json::parse(io::read_text_file(dir / "results/orbit_F4.json"));
    CHECK(doc["n"] == 4);
    CHECK(doc["orbits"].size() > 3);
    const RunResult partial = run_cli(
        "orbit --config " + config("orbit_F4.json") + " --output-dir " + dir.string() + " --set budget=10", dir);
    CHECK(partial.exit_code == 0);
    CHECK(partial.stdout_text.find("\"warning\"") != std::string::npos);
  }
}
