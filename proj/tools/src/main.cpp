#include <iostream>

#include "CLI11.hpp"
#include "nanode/parallel.hpp"
#include "nanode_cli/commands.hpp"

int main(int argc, char** argv) {
  namespace cli = nanode::cli;
  CLI::App app{"Non-autonomous neural ODE experiments"};
  app.require_subcommand(1);

  cli::CommonOptions common;
  common.threads = nanode::thread_budget();
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", common.config_path, "Run configuration (JSON)");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--out", common.out_dir, "Output directory");
    sub->add_option("--seed", seed, "Override train.seed");
    sub->add_flag("--quiet", common.quiet, "Suppress progress output");
  };

  auto* train = app.add_subcommand("train", "Train a model and write metrics, checkpoint, summary");
  add_common(train, true);
  auto* gradcheck = app.add_subcommand("gradcheck", "Compare gradients against finite differences");
  add_common(gradcheck, true);
  auto* stability = app.add_subcommand("stability", "Sensitivity and state-transition norms");
  add_common(stability, true);
  std::string checkpoint;
  stability->add_option("--checkpoint", checkpoint, "Evaluate at these parameters")
      ->check(CLI::ExistingFile);
  auto* orthobench = app.add_subcommand("orthobench", "Householder chain vs dense matvec");
  add_common(orthobench, false);
  cli::OrthobenchOptions ob;
  orthobench->add_option("--n", ob.n, "State dimension")->check(CLI::PositiveNumber);
  orthobench->add_option("--d", ob.d, "Reflections in the chain")->check(CLI::PositiveNumber);
  orthobench->add_option("--repeats", ob.repeats, "Timed applications")->check(CLI::PositiveNumber);
  auto* datagen = app.add_subcommand("datagen", "Write the configured dataset to CSV");
  add_common(datagen, true);

  CLI11_PARSE(app, argc, argv);

  auto* active = app.get_subcommands().front();
  if (active->count("--seed") > 0) {
    common.seed = seed;
    ob.seed = seed;
  }

  try {
    if (active == train) return cli::cmd_train(common);
    if (active == gradcheck) return cli::cmd_gradcheck(common);
    if (active == stability) return cli::cmd_stability(common, checkpoint);
    if (active == orthobench) return cli::cmd_orthobench(common, ob);
    if (active == datagen) return cli::cmd_datagen(common);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitCheckFailed;
  }
  return cli::kExitOk;
}
