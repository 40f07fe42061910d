#include "app.hpp"

#include <cmath>
#include <cstdint>
#include <sstream>

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

[[noreturn]] void usage_fail(const std::string& what) { throw UsageError(what); }

const json& required(const json& node, const char* key) {
  if (!node.is_object() || !node.contains(key)) usage_fail(std::string("missing config field \"") + key + "\"");
  return node.at(key);
}

template <class T>
T get_or(const json& node, const char* key, T fallback) {
  if (!node.is_object() || !node.contains(key)) return fallback;
  try {
    return node.at(key).get<T>();
  } catch (const json::exception&) {
    usage_fail(std::string("config field \"") + key + "\" has the wrong type: " + node.at(key).dump());
  }
}

template <class T>
T get_required(const json& node, const char* key) {
  const json& v = required(node, key);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    usage_fail(std::string("config field \"") + key + "\" has the wrong type: " + v.dump());
  }
}

std::uint64_t required_rng_seed(const json& node, const char* command) {
  if (!node.contains("rng_seed"))
    usage_fail(std::string(command) + " is stochastic here and needs \"rng_seed\"");
  return get_required<std::uint64_t>(node, "rng_seed");
}

SpherePoint point_from_config(const json& j) {
  if (j.is_number()) return SpherePoint::from_complex(cplx(j.get<double>(), 0.0));
  return io::point_from_json(j.dump());
}

std::vector<SpherePoint> points_from_config(const json& j) {
  if (!j.is_array()) usage_fail("expected an array of points, got " + j.dump());
  std::vector<SpherePoint> out;
  for (const auto& p : j) out.push_back(point_from_config(p));
  return out;
}

json point_out(const SpherePoint& p) { return json::parse(io::point_to_json(p)); }

MobiusMap mobius_from_config(const json& j) {
  if (!j.is_object()) usage_fail("expected a Mobius map object, got " + j.dump());
  return MobiusMap(complex_from_json(required(j, "a")), complex_from_json(required(j, "b")),
                   complex_from_json(required(j, "c")), complex_from_json(required(j, "d")));
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_artifact(const fs::path& p, const std::string& text) {
  ensure_parent(p);
  io::write_text_file(p, text);
}

std::string format_point(const SpherePoint& p) {
  std::ostringstream s;
  s << p.to_complex();
  return s.str();
}

Viewport viewport_from_config(const json& j) {
  Viewport v;
  const std::string chart = get_or<std::string>(j, "chart", "standard");
  if (chart == "standard")
    v.chart = Chart::Standard;
  else if (chart == "reciprocal")
    v.chart = Chart::Reciprocal;
  else
    usage_fail("viewport chart must be standard or reciprocal");
  if (j.contains("center")) v.center = complex_from_json(j.at("center"));
  v.half_width = get_or<double>(j, "half_width", v.half_width);
  return v;
}

KleinReport klein_from_config(const json& k) {
  KleinOptions opt;
  opt.rng_seed = required_rng_seed(k, "klein check");
  opt.n_samples = get_or<int>(k, "n_samples", opt.n_samples);
  opt.check_consequence = get_or<bool>(k, "check_consequence", false);
  if (k.contains("punctures")) opt.punctures = points_from_config(k.at("punctures"));
  opt.puncture_radius = get_or<double>(k, "puncture_radius", opt.puncture_radius);
  return klein_pair_check(correspondence_from_config(required(k, "f1")),
                          io::region_from_json(required(k, "region1").dump()),
                          correspondence_from_config(required(k, "f2")),
                          io::region_from_json(required(k, "region2").dump()), opt);
}

bool is_partial_flag(const std::string& flag) {
  return flag.rfind("budget reached", 0) == 0 || flag.rfind("seed cap reached", 0) == 0;
}

json report_summary(const EntropyReport& r) {
  json slopes = json::array();
  for (const auto& s : r.slopes) slopes.push_back(json::array({s.eps, s.slope, s.n_lo, s.n_hi}));
  return {{"estimate", r.estimate}, {"slopes", slopes}, {"flags", r.flags}};
}

}  // namespace

json load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  std::string text;
  try {
    text = io::read_text_file(path);
  } catch (const Error& e) {
    usage_fail("cannot read config " + path.string() + ": " + e.what());
  }
  json config;
  try {
    config = json::parse(text);
  } catch (const json::exception& e) {
    usage_fail("config " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!config.is_object()) usage_fail("config must be a JSON object");
  for (const auto& o : overrides) apply_override(config, o);
  return config;
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) usage_fail("override must look like key.path=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) usage_fail("empty component in override key " + key);
    if (!node->is_object()) usage_fail("override " + key + " descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  usage_fail("expected a number or [re, im], got " + j.dump());
}

RationalMap rational_map_from_config(const json& node) {
  if (!node.is_object()) usage_fail("expected a rational map object, got " + node.dump());
  // Coefficients may be plain reals in configs.
  const auto coeffs = [](const json& list) {
    if (!list.is_array()) usage_fail("polynomial coefficients must be an array, got " + list.dump());
    json out = json::array();
    for (const auto& a : list) {
      const cplx z = complex_from_json(a);
      out.push_back(json::array({z.real(), z.imag()}));
    }
    return out;
  };
  const json plain{{"num", coeffs(required(node, "num"))},
                   {"den", node.contains("den") ? coeffs(node.at("den")) : json::array({json::array({1.0, 0.0})})}};
  RationalMap r = io::rational_map_from_json(plain.dump());
  if (node.contains("precompose")) r = precompose(r, mobius_from_config(node.at("precompose")));
  return r;
}

Correspondence correspondence_from_config(const json& node) {
  const std::string family = get_required<std::string>(node, "family");
  Correspondence c;
  if (family == "F_a") {
    c = make_Fa(FamilyParameterA::make(complex_from_json(required(node, "a"))));
  } else if (family == "F_RS") {
    c = make_FRS(rational_map_from_config(required(node, "R")), rational_map_from_config(required(node, "S")));
  } else if (family == "cov") {
    c = cov_correspondence(rational_map_from_config(required(node, "map")), "Cov");
  } else if (family == "graph_of_map") {
    c = Correspondence::from_rational_map(rational_map_from_config(required(node, "map")), "graph");
  } else if (family == "mobius") {
    c = Correspondence::from_mobius(mobius_from_config(required(node, "map")), "mobius");
  } else if (family == "identity") {
    c = Correspondence::from_graph(GraphPolynomial::identity(), "identity");
  } else if (family == "inverse") {
    const Correspondence of = correspondence_from_config(required(node, "of"));
    c = inverse(of).renamed(of.name() + "^-1");
  } else if (family == "compose") {
    const json& stages = required(node, "stages");
    if (!stages.is_array() || stages.empty()) usage_fail("compose needs a nonempty \"stages\" array");
    std::vector<Correspondence> parts;
    for (const auto& s : stages) parts.push_back(correspondence_from_config(s));
    c = Correspondence::chained(parts, "compose");
  } else if (family == "explicit") {
    c = io::correspondence_from_json(required(node, "correspondence").dump());
  } else {
    usage_fail("unknown correspondence family \"" + family + "\"");
  }
  if (node.contains("name")) c = c.renamed(get_required<std::string>(node, "name"));
  return c;
}

EntropyProtocol protocol_from_config(const json& node) {
  EntropyProtocol p;
  if (node.is_null()) return p;
  if (!node.is_object()) usage_fail("protocol must be an object");
  p.eps_grid = get_or<std::vector<double>>(node, "eps_grid", p.eps_grid);
  p.n_min = get_or<int>(node, "n_min", p.n_min);
  p.n_max = get_or<int>(node, "n_max", p.n_max);
  p.seed_net = get_or<int>(node, "seed_net", p.seed_net);
  const std::string refine = get_or<std::string>(node, "refine", "auto");
  if (refine == "auto")
    p.refine = Refinement::Auto;
  else if (refine == "on")
    p.refine = Refinement::On;
  else if (refine == "off")
    p.refine = Refinement::Off;
  else
    usage_fail("protocol.refine must be auto, on or off");
  p.refine_factor = get_or<double>(node, "refine_factor", p.refine_factor);
  p.max_seeds = get_or<std::size_t>(node, "max_seeds", p.max_seeds);
  p.budget = get_or<std::size_t>(node, "budget", p.budget);
  if (p.eps_grid.empty()) usage_fail("protocol.eps_grid must not be empty");
  if (p.n_min < 0 || p.n_max < p.n_min) usage_fail("protocol needs 0 <= n_min <= n_max");
  if (p.seed_net < 1) usage_fail("protocol.seed_net must be positive");
  return p;
}

fs::path RunContext::resolve(const std::string& relative) const {
  const fs::path p(relative);
  return p.is_absolute() ? p : output_dir / p;
}

json cmd_cov(const json& config, const RunContext& ctx) {
  const RationalMap r = rational_map_from_config(required(config, "map"));
  const GraphPolynomial g = cov_graph(r);
  const fs::path out = ctx.resolve(get_required<std::string>(config, "out"));
  write_artifact(out, io::graph_polynomial_to_json(g) + "\n");
  return {{"command", "cov"},
          {"deg_z", g.deg_z()},
          {"deg_w", g.deg_w()},
          {"bidegree", json::array({g.deg_w(), g.deg_z()})},
          {"out", out.string()}};
}

json cmd_orbit(const json& config, const RunContext& ctx) {
  const Correspondence c = correspondence_from_config(required(config, "correspondence"));
  const std::vector<SpherePoint> seeds = points_from_config(required(config, "seeds"));
  const int n = get_required<int>(config, "n");
  const auto budget = get_or<std::size_t>(config, "budget", std::size_t{1} << 20);
  const OrbitEnumeration e = enumerate_orbits(c, seeds, n, budget);
  json orbits = json::array();
  for (const auto& o : e.orbits) {
    json pts = json::array();
    for (const auto& p : o.points) pts.push_back(point_out(p));
    orbits.push_back({{"points", pts}, {"labels", o.labels}});
  }
  const fs::path out = ctx.resolve(get_required<std::string>(config, "out"));
  write_artifact(out, json{{"n", n}, {"budget_exceeded", e.budget_exceeded}, {"orbits", orbits}}.dump(2) + "\n");
  json summary{{"command", "orbit"}, {"orbits", e.orbits.size()}, {"out", out.string()}};
  if (e.budget_exceeded) summary["warning"] = "node budget reached; orbits cover a prefix of the sorted seeds";
  return summary;
}

json cmd_entropy(const json& config, const RunContext& ctx) {
  const Correspondence c = correspondence_from_config(required(config, "correspondence"));
  const EntropyProtocol protocol = protocol_from_config(config.value("protocol", json()));
  const json& outputs = required(config, "outputs");
  EntropyEstimate est = entropy_estimate(c, protocol);

  json summary{{"command", "entropy"},
               {"correspondence", c.name()},
               {"bidegree", json::array({c.d1(), c.d2()})},
               {"cap", est.kt.cap}};
  std::string klein_flag;
  if (config.contains("klein")) {
    const KleinReport k = klein_from_config(config.at("klein"));
    summary["klein_certified"] = k.passed();
    if (outputs.contains("klein"))
      write_artifact(ctx.resolve(get_required<std::string>(outputs, "klein")), io::klein_report_to_json(k) + "\n");
    klein_flag = k.passed() ? "Klein pair certified: 0 violations, 0 uncovered in " + std::to_string(k.n_samples) +
                                  " samples"
                            : "Klein pair not certified: " + std::to_string(k.violation_count) + " violations, " +
                                  std::to_string(k.uncovered_count) + " uncovered; run is a cap and bidegree check";
  } else if (config.value("klein_expected", false)) {
    summary["klein_certified"] = false;
    klein_flag = "no Klein pair supplied; run is a cap and bidegree check";
  }
  if (!klein_flag.empty()) {
    est.kt.flags.push_back(klein_flag);
    est.ds.flags.push_back(klein_flag);
  }

  write_artifact(ctx.resolve(get_required<std::string>(outputs, "kt")), io::entropy_report_to_json(est.kt) + "\n");
  write_artifact(ctx.resolve(get_required<std::string>(outputs, "ds")), io::entropy_report_to_json(est.ds) + "\n");
  summary["kt"] = report_summary(est.kt);
  summary["ds"] = report_summary(est.ds);
  for (const auto* r : {&est.kt, &est.ds})
    for (const auto& f : r->flags)
      if (is_partial_flag(f)) summary["warning"] = "partial budget: " + f;
  return summary;
}

json cmd_equidist(const json& config, const RunContext& ctx) {
  const Correspondence c = correspondence_from_config(required(config, "correspondence"));
  const std::vector<SpherePoint> seeds = points_from_config(required(config, "seeds"));
  const auto depths = get_required<std::vector<int>>(config, "depths");
  const std::string method = get_or<std::string>(config, "method", "full_tree");
  const auto max_atoms = get_or<std::size_t>(config, "max_atoms", 4096);
  PullbackOptions opt;
  opt.budget = get_or<std::uint64_t>(config, "budget", opt.budget);
  std::uint64_t rng_seed = 0;
  std::size_t n_paths = 0;
  if (method == "monte_carlo") {
    rng_seed = required_rng_seed(config, "equidist with monte_carlo");
    n_paths = get_required<std::size_t>(config, "n_paths");
  } else if (method != "full_tree") {
    usage_fail("equidist method must be full_tree or monte_carlo");
  }
  if (seeds.empty() || depths.empty()) usage_fail("equidist needs seeds and depths");

  for (const auto& s : seeds)
    if (is_exceptional_seed(c, s))
      throw Error(ErrorCode::ExceptionalStart, "seed " + format_point(s) + " lies in the exceptional set E_a of " +
                                                   c.name() + " (finite backward orbit); pick another seed");

  const fs::path dir = ctx.resolve(get_or<std::string>(config, "out_dir", "equidist"));
  fs::create_directories(dir);
  std::vector<std::vector<WeightedCloud>> clouds(seeds.size());
  std::vector<int> done;
  std::string warning;
  for (int n : depths) {
    std::vector<WeightedCloud> level;
    try {
      for (std::size_t i = 0; i < seeds.size(); ++i) {
        level.push_back(method == "full_tree"
                            ? pullback_dirac_tree(c, seeds[i], n, opt)
                            : pullback_dirac_mc(c, seeds[i], n, n_paths, mix64(rng_seed + i), opt));
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BudgetExceeded) throw;
      warning = "budget reached at depth " + std::to_string(n) + "; deeper levels skipped";
      break;
    }
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      io::write_cloud(dir / ("seed" + std::to_string(i) + "_n" + std::to_string(n) + ".csv"), level[i]);
      clouds[i].push_back(std::move(level[i]));
    }
    done.push_back(n);
  }

  json table = json::array();
  json first_pair = json::array();
  for (std::size_t k = 0; k < done.size(); ++k)
    for (std::size_t i = 0; i < seeds.size(); ++i)
      for (std::size_t j = i + 1; j < seeds.size(); ++j) {
        const double d = energy_distance(clouds[i][k], clouds[j][k], max_atoms);
        table.push_back(json::array({done[k], i, j, d}));
        if (i == 0 && j == 1) first_pair.push_back(d);
      }
  int inversions = 0;
  for (std::size_t k = 1; k < first_pair.size(); ++k)
    if (first_pair[k].get<double>() > first_pair[k - 1].get<double>()) ++inversions;
  json seed_list = json::array();
  for (const auto& s : seeds) seed_list.push_back(point_out(s));
  const json doc{{"correspondence", c.name()}, {"method", method}, {"seeds", seed_list},
                 {"depths", done},             {"max_atoms", max_atoms}, {"distances", table}};
  write_artifact(dir / "distances.json", doc.dump(2) + "\n");

  json summary{{"command", "equidist"}, {"depths", done}, {"out_dir", dir.string()}};
  // Optional metric entropy of the deepest cloud of the first seed.
  if (config.contains("metric_entropy") && !done.empty()) {
    const json& m = config.at("metric_entropy");
    const GridPartition part(get_or<int>(m, "bands", 4), get_or<int>(m, "sectors", 4));
    const MetricEntropyResult me =
        metric_entropy_estimate(c, clouds[0].back(), part, get_or<int>(m, "n_max", 6),
                                get_or<std::uint64_t>(m, "budget", std::uint64_t{1} << 18));
    const json me_json{{"depth", done.back()},
                       {"bands", part.bands()},
                       {"sectors", part.sectors()},
                       {"joint_entropy", me.joint_entropy},
                       {"per_step", me.per_step},
                       {"slope", me.slope}};
    write_artifact(dir / "metric_entropy.json", me_json.dump(2) + "\n");
    summary["metric_entropy"] = me.slope;
  }
  if (seeds.size() >= 2) {
    summary["distances"] = first_pair;
    summary["inversions"] = inversions;
  }
  if (!warning.empty()) summary["warning"] = warning;
  return summary;
}

json cmd_limitset(const json& config, const RunContext& ctx) {
  const Correspondence c = correspondence_from_config(required(config, "correspondence"));
  const RegionSpec region = io::region_from_json(required(config, "region").dump());
  LimitSetOptions opt;
  opt.depth = get_or<int>(config, "depth", opt.depth);
  opt.node_budget = get_or<std::size_t>(config, "node_budget", opt.node_budget);
  const int width = get_or<int>(config, "width", 256);
  const int height = get_or<int>(config, "height", width);
  const Viewport viewport = viewport_from_config(config.value("viewport", json::object()));
  const LimitSetResult res = rasterize_limit_set(c, region, width, height, viewport, opt);
  const fs::path out = ctx.resolve(get_required<std::string>(config, "out"));
  ensure_parent(out);
  io::write_ppm(out, res.image);
  json summary{{"command", "limitset"},
               {"marked", res.marked},
               {"undecided", res.undecided},
               {"out", out.string()}};
  if (res.undecided > 0)
    summary["warning"] = std::to_string(res.undecided) + " pixels ran out of node budget and were marked";
  return summary;
}

json run_command(const std::string& command, const json& config, const RunContext& ctx) {
  try {
    if (command == "cov") return cmd_cov(config, ctx);
    if (command == "orbit") return cmd_orbit(config, ctx);
    if (command == "entropy") return cmd_entropy(config, ctx);
    if (command == "equidist") return cmd_equidist(config, ctx);
    if (command == "limitset") return cmd_limitset(config, ctx);
    if (command == "verify") return cmd_verify(config, ctx);
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed config: ") + e.what());
  }
  throw UsageError("unknown command " + command);
}

}  // namespace corrdyn::app
