#include "corrdyn/io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "corrdyn/error.hpp"
#include "json.hpp"

namespace corrdyn::io {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

json parse(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    parse_fail(std::string("invalid JSON: ") + e.what());
  }
}

template <class F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    parse_fail(std::string(what) + ": " + e.what());
  }
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    parse_fail("expected [re, im], got " + j.dump());
  return {j[0].get<double>(), j[1].get<double>()};
}

json point_json(const SpherePoint& p) {
  json j = complex_json(p.value());
  if (p.chart() == Chart::Reciprocal) j.push_back("reciprocal");
  return j;
}

SpherePoint point_from(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return SpherePoint::infinity();
    parse_fail("unknown point literal " + j.dump());
  }
  if (j.is_array() && j.size() == 3) {
    if (j[2] != "reciprocal" && j[2] != "standard") parse_fail("unknown chart in " + j.dump());
    const cplx v = complex_from(json::array({j[0], j[1]}));
    return SpherePoint(v, j[2] == "reciprocal" ? Chart::Reciprocal : Chart::Standard);
  }
  return SpherePoint::from_complex(complex_from(j));
}

json poly_json(const ComplexPolynomial& p) {
  json j = json::array();
  for (const cplx& c : p.coefficients()) j.push_back(complex_json(c));
  return j;
}

ComplexPolynomial poly_from(const json& j) {
  if (!j.is_array()) parse_fail("polynomial must be an array of [re, im] pairs");
  std::vector<cplx> coeffs;
  for (const auto& c : j) coeffs.push_back(complex_from(c));
  return ComplexPolynomial(std::move(coeffs));
}

json rational_json(const RationalMap& r) {
  return {{"num", poly_json(r.numerator())}, {"den", poly_json(r.denominator())}};
}

RationalMap rational_from(const json& j) {
  if (!j.is_object() || !j.contains("num")) parse_fail("rational map needs \"num\"");
  const ComplexPolynomial den = j.contains("den") ? poly_from(j.at("den")) : ComplexPolynomial{1.0};
  return RationalMap(poly_from(j.at("num")), den);
}

json graph_json(const GraphPolynomial& g) {
  json coeffs = json::array();
  for (int i = 0; i <= g.deg_z(); ++i)
    for (int k = 0; k <= g.deg_w(); ++k) coeffs.push_back(complex_json(g.coeff(i, k)));
  return {{"deg_z", g.deg_z()}, {"deg_w", g.deg_w()}, {"coeffs", coeffs}};
}

GraphPolynomial graph_from(const json& j) {
  return guarded("graph polynomial", [&] {
    const int dz = j.at("deg_z").get<int>();
    const int dw = j.at("deg_w").get<int>();
    if (dz < 0 || dw < 0) parse_fail("graph degrees must be nonnegative");
    const auto& c = j.at("coeffs");
    if (!c.is_array() || c.size() != static_cast<std::size_t>(dz + 1) * static_cast<std::size_t>(dw + 1))
      parse_fail("graph coeffs must hold (deg_z + 1) * (deg_w + 1) entries");
    std::vector<cplx> coeffs;
    for (const auto& e : c) coeffs.push_back(complex_from(e));
    return GraphPolynomial(dz, dw, std::move(coeffs));
  });
}

json correspondence_json(const Correspondence& c) {
  json comps = json::array();
  json chain = json::array();
  if (c.is_chained()) {
    for (const auto& s : c.stages()) chain.push_back(correspondence_json(s));
  } else {
    for (const auto& comp : c.components())
      comps.push_back({{"graph", graph_json(comp.graph)}, {"multiplicity", comp.multiplicity}});
  }
  return {{"name", c.name()}, {"components", comps}, {"chain", chain}, {"d1", c.d1()}, {"d2", c.d2()}};
}

Correspondence correspondence_from(const json& j) {
  return guarded("correspondence", [&] {
    const std::string name = j.value("name", std::string{});
    const json empty = json::array();
    const json& comps = j.contains("components") ? j.at("components") : empty;
    const json& chain = j.contains("chain") ? j.at("chain") : empty;
    if (comps.empty() == chain.empty()) parse_fail("correspondence needs exactly one of components and chain");
    Correspondence c;
    if (!chain.empty()) {
      std::vector<Correspondence> stages;
      for (const auto& s : chain) stages.push_back(correspondence_from(s));
      c = Correspondence::chained(stages, name);
    } else {
      std::vector<Component> parts;
      for (const auto& p : comps) parts.push_back({graph_from(p.at("graph")), p.value("multiplicity", 1)});
      c = Correspondence::direct(std::move(parts), name);
    }
    if (j.contains("d1") && j.at("d1").get<int>() != c.d1()) parse_fail("declared d1 does not match the graphs");
    if (j.contains("d2") && j.at("d2").get<int>() != c.d2()) parse_fail("declared d2 does not match the graphs");
    return c;
  });
}

json region_json(const RegionSpec& r) {
  json j{{"kind", region_kind_name(r.kind)}};
  if (r.kind == RegionSpec::Kind::HalfPlane) {
    j["point"] = complex_json(r.point);
    j["normal"] = complex_json(r.normal);
  } else {
    j["center"] = complex_json(r.center);
    j["radius"] = r.radius;
  }
  return j;
}

RegionSpec region_from(const json& j) {
  return guarded("region", [&] {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "disk") return RegionSpec::disk(complex_from(j.at("center")), j.at("radius").get<double>());
    if (kind == "complement")
      return RegionSpec::complement(complex_from(j.at("center")), j.at("radius").get<double>());
    if (kind == "half_plane") return RegionSpec::half_plane(complex_from(j.at("point")), complex_from(j.at("normal")));
    parse_fail("unknown region kind \"" + kind + "\"");
  });
}

json witness_list(const std::vector<KleinWitness>& ws) {
  json out = json::array();
  for (const auto& w : ws) out.push_back({{"point", point_json(w.point)}, {"image", point_json(w.image)}, {"region", w.region}});
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    parse_fail("bad number \"" + s + "\" on line " + std::to_string(line));
  return v;
}

}  // namespace

std::string point_to_json(const SpherePoint& p) { return point_json(p).dump(); }
SpherePoint point_from_json(std::string_view text) { return point_from(parse(text)); }

std::string polynomial_to_json(const ComplexPolynomial& p) { return poly_json(p).dump(); }
ComplexPolynomial polynomial_from_json(std::string_view text) { return poly_from(parse(text)); }

std::string rational_map_to_json(const RationalMap& r) { return rational_json(r).dump(); }
RationalMap rational_map_from_json(std::string_view text) { return rational_from(parse(text)); }

std::string mobius_to_json(const MobiusMap& m) {
  return json{{"a", complex_json(m.a())}, {"b", complex_json(m.b())}, {"c", complex_json(m.c())}, {"d", complex_json(m.d())}}
      .dump();
}

MobiusMap mobius_from_json(std::string_view text) {
  const json j = parse(text);
  return guarded("Mobius map", [&] {
    return MobiusMap(complex_from(j.at("a")), complex_from(j.at("b")), complex_from(j.at("c")), complex_from(j.at("d")));
  });
}

std::string graph_polynomial_to_json(const GraphPolynomial& g) { return graph_json(g).dump(); }
GraphPolynomial graph_polynomial_from_json(std::string_view text) { return graph_from(parse(text)); }

std::string correspondence_to_json(const Correspondence& c) { return correspondence_json(c).dump(); }
Correspondence correspondence_from_json(std::string_view text) { return correspondence_from(parse(text)); }

std::string region_to_json(const RegionSpec& r) { return region_json(r).dump(); }
RegionSpec region_from_json(std::string_view text) { return region_from(parse(text)); }

std::string klein_report_to_json(const KleinReport& r) {
  json j{{"passed", r.passed()},
         {"rng_seed", r.rng_seed},
         {"n_samples", r.n_samples},
         {"violation_count", r.violation_count},
         {"uncovered_count", r.uncovered_count},
         {"violations", witness_list(r.violations)},
         {"uncovered", witness_list(r.uncovered)}};
  if (r.consequence_checked) {
    j["consequence_count"] = r.consequence_count;
    j["consequence_hits"] = witness_list(r.consequence_hits);
  }
  return j.dump(2);
}

std::string entropy_report_to_json(const EntropyReport& r) {
  json counts = json::array();
  for (const auto& c : r.counts) counts.push_back(json::array({c.n, c.eps, c.count}));
  json slopes = json::array();
  for (const auto& s : r.slopes) slopes.push_back(json::array({s.eps, s.slope, s.n_lo, s.n_hi}));
  const json j{{"variant", r.variant}, {"counts", counts},       {"slopes", slopes},
               {"estimate", r.estimate}, {"cap", r.cap},         {"flags", r.flags},
               {"nodes_used", r.nodes_used}, {"seeds_used", r.seeds_used}};
  return j.dump(2);
}

EntropyReport entropy_report_from_json(std::string_view text) {
  const json j = parse(text);
  return guarded("entropy report", [&] {
    EntropyReport r;
    r.variant = j.at("variant").get<std::string>();
    if (r.variant != "KT" && r.variant != "DS") parse_fail("variant must be KT or DS");
    for (const auto& c : j.at("counts"))
      r.counts.push_back({c.at(0).get<int>(), c.at(1).get<double>(), c.at(2).get<std::int64_t>()});
    for (const auto& s : j.at("slopes"))
      r.slopes.push_back({s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<int>(), s.at(3).get<int>()});
    r.estimate = j.at("estimate").get<double>();
    r.cap = j.at("cap").get<double>();
    r.flags = j.at("flags").get<std::vector<std::string>>();
    r.nodes_used = j.value("nodes_used", std::size_t{0});
    r.seeds_used = j.value("seeds_used", std::size_t{0});
    return r;
  });
}

std::filesystem::path provenance_path(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".json");
  return p;
}

void write_cloud(const std::filesystem::path& csv_path, const WeightedCloud& cloud) {
  std::string csv = "re,im,chart,weight\n";
  for (const auto& a : cloud.atoms) {
    csv += fmt_double(a.point.value().real()) + "," + fmt_double(a.point.value().imag()) + "," +
           (a.point.chart() == Chart::Reciprocal ? "1" : "0") + "," + fmt_double(a.weight) + "\n";
  }
  const json side{{"generation", cloud.generation},
                  {"seed", point_json(cloud.provenance.seed)},
                  {"correspondence_id", cloud.provenance.correspondence_id},
                  {"method", cloud.provenance.method},
                  {"rng_seed", cloud.provenance.rng_seed},
                  {"atoms", cloud.atoms.size()}};
  write_text_file(csv_path, csv);
  write_text_file(provenance_path(csv_path), side.dump(2) + "\n");
}

WeightedCloud read_cloud(const std::filesystem::path& csv_path) {
  WeightedCloud cloud;
  const json side = parse(read_text_file(provenance_path(csv_path)));
  guarded("cloud provenance", [&] {
    cloud.generation = side.at("generation").get<int>();
    cloud.provenance.seed = point_from(side.at("seed"));
    cloud.provenance.correspondence_id = side.at("correspondence_id").get<std::string>();
    cloud.provenance.method = side.at("method").get<std::string>();
    cloud.provenance.rng_seed = side.at("rng_seed").get<std::uint64_t>();
    return 0;
  });
  std::istringstream in(read_text_file(csv_path));
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line != "re,im,chart,weight") parse_fail("cloud CSV header must be re,im,chart,weight");
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 4) parse_fail("cloud CSV line " + std::to_string(lineno) + " needs 4 fields");
    if (fields[2] != "0" && fields[2] != "1") parse_fail("chart must be 0 or 1 on line " + std::to_string(lineno));
    const cplx v(parse_double(fields[0], lineno), parse_double(fields[1], lineno));
    cloud.atoms.push_back({SpherePoint(v, fields[2] == "1" ? Chart::Reciprocal : Chart::Standard),
                           parse_double(fields[3], lineno)});
  }
  if (side.contains("atoms") && side.at("atoms").get<std::size_t>() != cloud.atoms.size())
    parse_fail("atom count differs from the provenance sidecar");
  return cloud;
}

void write_ppm(const std::filesystem::path& path, const RasterImage& image) {
  if (image.rgb.size() != static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height) * 3)
    throw Error(ErrorCode::BadParameter, "pixel buffer does not match the image size");
  std::string out = "P6\n# corrdyn chart=";
  out += image.viewport.chart == Chart::Reciprocal ? "reciprocal" : "standard";
  out += " center=" + fmt_double(image.viewport.center.real()) + "," + fmt_double(image.viewport.center.imag());
  out += " half_width=" + fmt_double(image.viewport.half_width) + "\n";
  out += std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.rgb.data()), image.rgb.size());
  write_text_file(path, out);
}

RasterImage read_ppm(const std::filesystem::path& path) {
  const std::string data = read_text_file(path);
  std::size_t pos = 0;
  Viewport vp;
  auto next_token = [&]() {
    for (;;) {
      while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
      if (pos < data.size() && data[pos] == '#') {
        const std::size_t end = data.find('\n', pos);
        const std::string comment = data.substr(pos, end - pos);
        char chart[16] = {0};
        double cr = 0.0, ci = 0.0, hw = 0.0;
        if (std::sscanf(comment.c_str(), "# corrdyn chart=%15s center=%lf,%lf half_width=%lf", chart, &cr, &ci, &hw) ==
            4) {
          vp.chart = std::string(chart) == "reciprocal" ? Chart::Reciprocal : Chart::Standard;
          vp.center = {cr, ci};
          vp.half_width = hw;
        }
        pos = end == std::string::npos ? data.size() : end + 1;
        continue;
      }
      break;
    }
    const std::size_t start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    return data.substr(start, pos - start);
  };
  if (next_token() != "P6") parse_fail("not a binary PPM");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token());
    h = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    parse_fail("malformed PPM header");
  }
  if (maxval != 255) parse_fail("only 8-bit PPM is supported");
  ++pos;
  RasterImage img(w, h, vp);
  if (data.size() - pos != img.rgb.size()) parse_fail("PPM pixel data has the wrong size");
  std::copy(data.begin() + static_cast<std::ptrdiff_t>(pos), data.end(), img.rgb.begin());
  return img;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace corrdyn::io
