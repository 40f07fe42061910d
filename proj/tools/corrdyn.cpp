#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "app/app.hpp"
#include "corrdyn/error.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Dynamics of holomorphic correspondences on the Riemann sphere"};
  cli.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir = ".";
  const std::vector<std::pair<std::string, std::string>> commands{
      {"cov", "deleted covering graph polynomial of a rational map"},
      {"orbit", "enumerate forward n-orbits from seeds"},
      {"entropy", "separated-set entropy estimates (KT and DS)"},
      {"equidist", "pullback clouds of Dirac masses and their energy distances"},
      {"limitset", "raster of points whose forward orbit can stay in a region"},
      {"verify", "invariant suites of every module"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = cli.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON experiment config")->required();
    sub->add_option("--set", overrides, "override a config field: key.path=value (repeatable)");
    sub->add_option("--output-dir", output_dir, "base directory for relative output paths");
  }

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const std::string command = cli.get_subcommands().front()->get_name();
  try {
    const auto config = corrdyn::app::load_config(config_path, overrides);
    const auto summary = corrdyn::app::run_command(command, config, {output_dir});
    std::cout << summary.dump(2) << "\n";
    if (summary.contains("warning")) std::cerr << "warning: " << summary.at("warning").get<std::string>() << "\n";
    if (command == "verify" && !summary.at("passed").get<bool>()) return kExitRuntime;
    return kExitOk;
  } catch (const corrdyn::app::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const corrdyn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == corrdyn::ErrorCode::ParseError ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
