#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kamc/harness/run.hpp"

namespace {

struct Invocation {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Invocation& inv) {
  cmd->add_option("--config", inv.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", inv.out, "output directory (defaults to the config's outputDirectory)");
  cmd->add_option("--seed", inv.seed, "override the config seed");
}

int execute(const Invocation& inv, std::optional<std::string> kind) {
  using namespace kamc;
  const auto config = harness::load_config(inv.config, std::move(kind), inv.seed);
  std::filesystem::path out = inv.out;
  if (out.empty()) {
    if (!config.output_directory) throw ConfigError("outputDirectory", "give --out or outputDirectory");
    out = *config.output_directory;
  }
  const auto result = harness::run(config, out);
  std::cout << "kind=" << config.kind << " seed=" << config.seed << " out=" << out.string()
            << " artifacts=" << result.manifest["artifacts"].size() << "\n"
            << result.summary.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kamc: minor concentration and Kolmogorov-Arnold experiments"};
  app.require_subcommand(1);

  Invocation inv;
  std::optional<std::string> kind;
  for (const auto& name : kamc::harness::kKinds) {
    auto* cmd = app.add_subcommand(name, "run a " + name + " experiment");
    add_common(cmd, inv);
    cmd->callback([&kind, name] { kind = name; });
  }
  auto* generic = app.add_subcommand("run", "run any experiment; the kind comes from the config");
  add_common(generic, inv);

  CLI11_PARSE(app, argc, argv);
  try {
    return execute(inv, kind);
  } catch (const kamc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
