#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Complex diffusion maps pipeline driver"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 0;
  cli::Overrides overrides;

  app.add_option("--config", config_path, "JSON pipeline configuration")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", out, "output directory (overrides config)");
  CLI::Option* seed_opt =
      app.add_option("--seed", seed, "top-level seed (overrides config)");
  app.add_option("--threads", threads,
                 "sweep worker count (overrides config)");
  app.add_flag("--skip-first-coord", overrides.skip_first_coord,
               "drop the near-constant first coordinate (one extra pair is "
               "computed so s coordinates remain)");

  app.add_subcommand("generate",
                     "write dataset, labels and provenance files");
  app.add_subcommand("embed",
                     "build the diffusion model; write spectrum + embedding");
  app.add_subcommand("extend", "out-of-sample embedding of new points");
  app.add_subcommand("reconstruct", "lift embeddings back to data space");
  app.add_subcommand("align",
                     "unitary Procrustes alignment of two embeddings");
  app.add_subcommand("cluster", "k-means on the realified embedding");
  app.add_subcommand("evaluate", "cluster and score against known labels");
  app.add_subcommand("sweep", "grid search over (sigma, theta, p) cells");

  CLI11_PARSE(app, argc, argv);

  overrides.out = out;
  overrides.threads = threads;
  if (seed_opt->count() > 0) {
    overrides.has_seed = true;
    overrides.seed = seed;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const cli::Config config = cli::load_config(config_path, overrides);
    if (command == "generate") return cli::cmd_generate(config);
    if (command == "embed") return cli::cmd_embed(config);
    if (command == "extend") return cli::cmd_extend(config);
    if (command == "reconstruct") return cli::cmd_reconstruct(config);
    if (command == "align") return cli::cmd_align(config);
    if (command == "cluster") return cli::cmd_cluster(config);
    if (command == "evaluate") return cli::cmd_evaluate(config);
    return cli::cmd_sweep(config);
  } catch (const cli::CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return e.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 8;
  }
}
