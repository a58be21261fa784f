#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "qnet/config.hpp"
#include "qnet/error.hpp"
#include "qnet/run.hpp"

namespace {

constexpr const char* minimal_config = "network: {preset: three_prong}\ncommand: verify\n";

std::string describe(qnet::Command c) {
  switch (c) {
    case qnet::Command::Smatrix: return "S-matrix at one energy";
    case qnet::Command::ScanEnergy: return "S-matrix elements and unwrapped phases over an energy grid";
    case qnet::Command::ArgandSweep: return "adaptive Argand trajectory in U1 or k, with closed sub-loops";
    case qnet::Command::LpdosMap: return "lpdos, injectivity and sum-rule residual on a position/energy grid";
    case qnet::Command::Eq10Scan: return "|s|^2 change against weighted phase change over k, plus transmission minima";
    case qnet::Command::Verify: return "run the built-in invariant checks";
  }
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scattering, local partial density of states and Argand-loop analysis on quantum graphs"};
  app.set_version_flag("--version", std::string("qnet ") + qnet::version);
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  bool print_config = false;

  for (auto cmd : qnet::all_commands) {
    auto* sub = app.add_subcommand(std::string(qnet::command_name(cmd)), describe(cmd));
    sub->add_option("config", config_path, "YAML configuration (default: three-prong preset, all defaults)")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides 'output')");
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "seed for randomized checks in verify");
    sub->add_flag("--print-config", print_config, "print the effective configuration and exit");
  }
  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = config_path.empty() ? qnet::parse_config(minimal_config) : qnet::load_config(config_path);
    const auto name = app.get_subcommands().front()->get_name();
    for (auto cmd : qnet::all_commands)
      if (qnet::command_name(cmd) == name) cfg.command = cmd;
    if (out_dir) cfg.output = *out_dir;
    if (workers) cfg.workers = *workers;
    if (seed) cfg.seed = *seed;
    if (print_config) {
      std::cout << qnet::serialize_config(cfg);
      return 0;
    }
    const auto out = qnet::execute(cfg);
    qnet::write_outputs(out, cfg.output);
    std::cout << out.console;
    for (const auto& [file, table] : out.tables)
      std::cout << "wrote " << cfg.output << "/" << file << " (" << table.rows.size() << " rows)\n";
    return out.status;
  } catch (const qnet::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return qnet::exit_status(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
