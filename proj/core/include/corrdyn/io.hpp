#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "corrdyn/correspondence.hpp"
#include "corrdyn/entropy.hpp"
#include "corrdyn/family.hpp"
#include "corrdyn/graph_polynomial.hpp"
#include "corrdyn/limitset.hpp"
#include "corrdyn/measures.hpp"
#include "corrdyn/polynomial.hpp"

// Text formats.  Every writer emits doubles with round-trip precision, so a
// write followed by a read reproduces the value exactly.  Readers throw
// Error(ParseError) on malformed input.
namespace corrdyn::io {

// [re, im] in the standard chart, [re, im, "reciprocal"] for the reciprocal
// chart; the string "inf" is accepted on input.
std::string point_to_json(const SpherePoint& p);
SpherePoint point_from_json(std::string_view text);

// [[re, im], ...] in ascending degree.
std::string polynomial_to_json(const ComplexPolynomial& p);
ComplexPolynomial polynomial_from_json(std::string_view text);

// {"num": [...], "den": [...]}
std::string rational_map_to_json(const RationalMap& r);
RationalMap rational_map_from_json(std::string_view text);

// {"a": [re, im], "b": ..., "c": ..., "d": ...}
std::string mobius_to_json(const MobiusMap& m);
MobiusMap mobius_from_json(std::string_view text);

// {"deg_z": i, "deg_w": j, "coeffs": [[re, im], ...]} with coeffs row-major
// in z: entry i * (deg_w + 1) + j is the coefficient of z^i w^j.
std::string graph_polynomial_to_json(const GraphPolynomial& g);
GraphPolynomial graph_polynomial_from_json(std::string_view text);

// {"name": s, "components": [{"graph": G, "multiplicity": m}...],
//  "chain": [C...], "d1": n, "d2": m}; exactly one of components and chain
// is nonempty.  d1 and d2 are checked on input.
std::string correspondence_to_json(const Correspondence& c);
Correspondence correspondence_from_json(std::string_view text);

// {"kind": "disk"|"complement", "center": [re, im], "radius": r} or
// {"kind": "half_plane", "point": [re, im], "normal": [re, im]}.
std::string region_to_json(const RegionSpec& r);
RegionSpec region_from_json(std::string_view text);

std::string klein_report_to_json(const KleinReport& r);

// {"variant": "KT"|"DS", "counts": [[n, eps, count]...],
//  "slopes": [[eps, slope, n_lo, n_hi]...], "estimate": x, "cap": y,
//  "flags": [...], "nodes_used": k, "seeds_used": m}
std::string entropy_report_to_json(const EntropyReport& r);
EntropyReport entropy_report_from_json(std::string_view text);

// CSV with header re,im,chart,weight: (re, im) is the coordinate in the
// chart given by the third column (0 standard, 1 reciprocal).  The sidecar
// <stem>.json next to the CSV holds the generation and provenance.
void write_cloud(const std::filesystem::path& csv_path, const WeightedCloud& cloud);
WeightedCloud read_cloud(const std::filesystem::path& csv_path);
std::filesystem::path provenance_path(const std::filesystem::path& csv_path);

// Binary PPM (P6); the viewport is stored in a header comment.
void write_ppm(const std::filesystem::path& path, const RasterImage& image);
RasterImage read_ppm(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
// Writes through a temporary file and renames it into place.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace corrdyn::io
