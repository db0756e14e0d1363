#include "nsuq/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "experiment config (JSON)")->required();
  cmd->add_option("--seed", args.seed, "overrides the config seed");
  cmd->add_option("--out", args.out, "output directory (overrides the config)");
  cmd->add_option("--threads", args.threads, "worker threads (overrides NSUQ_THREADS)");
}

int run(nsuq::ExperimentMode mode, const CommonArgs& args) {
  nsuq::ExperimentConfig cfg = nsuq::read_json_file(args.config).get<nsuq::ExperimentConfig>();
  cfg.mode = mode;
  if (args.seed) cfg.seed = *args.seed;
  if (args.out) cfg.output_dir = *args.out;
  cfg.validate();
  nsuq::RunOptions opt;
  opt.threads = nsuq::resolve_thread_count(args.threads);
  const auto report = nsuq::run_experiment(cfg, opt);
  std::cout << "report: " << (report.output_dir / "report.json").string() << '\n';
  for (std::size_t l = 0; l < report.tainted.size(); ++l)
    if (report.tainted[l]) std::cout << "level " << l << " tainted\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo and collocation studies for barotropic Navier-Stokes on the torus"};
  app.require_subcommand(1);
  CommonArgs weak, strong, conv;
  add_common(app.add_subcommand("run-weak", "Monte Carlo ensembles over a refinement ladder"), weak);
  add_common(app.add_subcommand("run-strong", "stochastic collocation over a refinement ladder"), strong);
  add_common(app.add_subcommand("run-convergence", "deterministic refinement study"), conv);
  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("run-weak")) return run(nsuq::ExperimentMode::weak, weak);
    if (app.got_subcommand("run-strong")) return run(nsuq::ExperimentMode::strong, strong);
    return run(nsuq::ExperimentMode::convergence, conv);
  } catch (const nsuq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const nsuq::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
