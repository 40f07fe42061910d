#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "corrdyn/correspondence.hpp"
#include "corrdyn/entropy.hpp"
#include "json.hpp"

namespace corrdyn::app {

using nlohmann::json;

// Bad configuration or command line; mapped to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reads a JSON config and applies "key.path=value" overrides.  The value is
// parsed as JSON when possible and taken as a string otherwise.
json load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides);
void apply_override(json& config, const std::string& assignment);

// A complex number written as a JSON number or [re, im].
cplx complex_from_json(const json& j);

// Correspondence from a config node {"family": ..., ...}.  Families:
//   "F_a"          {"a": z}
//   "F_RS"         {"R": map, "S": map}
//   "cov"          {"map": map}
//   "graph_of_map" {"map": map}
//   "mobius"       {"map": {"a","b","c","d"}}
//   "identity"     {}
//   "inverse"      {"of": node}
//   "compose"      {"stages": [node...]}   stage 0 acts first
//   "explicit"     {"correspondence": serialized correspondence}
// A map is {"num": [...], "den": [...]} with an optional "precompose"
// Mobius map m, giving z -> map(m(z)).  An optional "name" renames the result.
Correspondence correspondence_from_config(const json& node);
RationalMap rational_map_from_config(const json& node);

EntropyProtocol protocol_from_config(const json& node);

// Where a command writes; relative artifact paths resolve against `output_dir`.
struct RunContext {
  std::filesystem::path output_dir = ".";
  std::filesystem::path resolve(const std::string& relative) const;
};

// Each command writes its artifacts and returns a summary for stdout.  A
// partial result carries a "warning" field.  Math failures propagate as
// corrdyn::Error, bad configs as UsageError.
json cmd_cov(const json& config, const RunContext& ctx);
json cmd_orbit(const json& config, const RunContext& ctx);
json cmd_entropy(const json& config, const RunContext& ctx);
json cmd_equidist(const json& config, const RunContext& ctx);
json cmd_limitset(const json& config, const RunContext& ctx);
json cmd_verify(const json& config, const RunContext& ctx);

json run_command(const std::string& command, const json& config, const RunContext& ctx);

}  // namespace corrdyn::app
