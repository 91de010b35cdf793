#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qtraj/experiment.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::string out = ".";
  int threads = 0;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_out = true) {
  cmd->add_option("--config", args.config, "experiment config (JSON)")->required();
  if (with_out) cmd->add_option("--out", args.out, "output directory");
  cmd->add_option("--threads", args.threads, "worker threads (default: all cores)");
  cmd->add_option("--seed", [&args](const std::vector<std::string>& v) {
        args.seed = std::stoull(v.at(0));
        return true;
      },
      "override the config seed");
}

int run(const std::string& name, const CommonArgs& args) {
  qtraj::RunOptions opts;
  opts.n_threads = args.threads;
  opts.seed_override = args.seed;
  const auto files = qtraj::run_subcommand(name, args.config, args.out, opts);
  for (const auto& f : files) std::cout << f << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conditioned quantum motion on a monitored tight-binding chain"};
  app.require_subcommand(1);

  const std::vector<std::string> commands = {
      "trajectory",       "spectrum-record", "spectrum-steady",
      "spectrum-perturbative", "liouville-eig",   "effective-modes",
      "peak-scan",        "zeno",            "correlation"};
  std::map<std::string, CommonArgs> args;
  for (const auto& name : commands) {
    auto* cmd = app.add_subcommand(name);
    add_common(cmd, args[name]);
  }
  CommonArgs validate_args;
  auto* validate_cmd = app.add_subcommand("validate", "check a config without running");
  add_common(validate_cmd, validate_args, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate_cmd->parsed()) {
      const auto cfg = qtraj::load_config(validate_args.config);
      const auto problems = qtraj::validate_config(cfg);
      if (problems.empty()) {
        std::cout << "ok\n" << qtraj::config_to_json(cfg).dump(2) << "\n";
        return 0;
      }
      for (const auto& p : problems) std::cout << p << "\n";
      return 1;
    }
    for (const auto& name : commands)
      if (app.get_subcommand(name)->parsed()) return run(name, args[name]);
  } catch (const qtraj::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
