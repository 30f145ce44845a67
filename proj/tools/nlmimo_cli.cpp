// nlmimo: batch front-end for the nonlinear massive MIMO design tools.
//
//   nlmimo bussgang --config run.yaml [--seed N] [--out PATH] [--format csv|json]
//   nlmimo design   --config run.yaml ...
//   nlmimo simulate --config run.yaml ...
//   nlmimo sweep    --config run.yaml ...
//
// Exit codes: 0 ok, 1 configuration error, 2 runtime error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "nlmimo/commands.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
  std::optional<int> workers;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "YAML or JSON run configuration")->required();
  sub->add_option("--seed", o.seed, "RNG seed (overrides the config)");
  sub->add_option("--out", o.out, "output file (default stdout)");
  sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--workers", o.workers, "worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design and simulation of massive MIMO uplinks with nonlinear receive chains"};
  app.require_subcommand(1);
  Options opts;
  for (const char* name : {"bussgang", "design", "simulate", "sweep"}) {
    add_common(app.add_subcommand(name), opts);
  }
  app.get_subcommand("bussgang")->description("Bussgang gain and intrinsic SNR per stage and cascade");
  app.get_subcommand("design")->description("Hardware specification per load factor and PC scheme");
  app.get_subcommand("simulate")->description("BER simulation and SNR_edge meeting the target");
  app.get_subcommand("sweep")->description("Resumable grid of simulate runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  nlmimo::RunConfig config;
  try {
    config = nlmimo::parse_config(nlmimo::read_config_file(opts.config));
    if (opts.seed) config.seed = opts.seed;
    if (opts.workers) config.workers = *opts.workers;
    if (!opts.format.empty()) config.format = opts.format;
    if (!opts.out.empty()) config.out_path = opts.out;
  } catch (const nlmimo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const auto result = nlmimo::run_command(command, config);
    if (config.out_path.empty()) {
      nlmimo::write_table(std::cout, result.table, config.format);
    } else {
      std::ofstream out(config.out_path, std::ios::binary);
      if (!out) throw std::runtime_error("cannot open '" + config.out_path + "' for writing");
      nlmimo::write_table(out, result.table, config.format);
    }
    if (!result.ok) {
      std::cerr << command << ": some cells failed; see the status column\n";
      return kExitRuntime;
    }
    return 0;
  } catch (const nlmimo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return kExitRuntime;
  }
}
