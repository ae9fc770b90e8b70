#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "patlab/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Photoacoustic tomography desk laboratory"};
  app.require_subcommand(1);

  struct Args {
    std::string config;
    std::string out;
    std::size_t workers = 0;
    std::uint64_t seed = 0;
  };
  Args args;
  CLI::Option* out_opt = nullptr;
  CLI::Option* workers_opt = nullptr;
  CLI::Option* seed_opt = nullptr;

  // The option objects are per subcommand; remember the last registered so
  // the selected one can be queried for presence.
  struct Sub {
    CLI::App* app;
    CLI::Option* out;
    CLI::Option* workers;
    CLI::Option* seed;
  };
  std::vector<Sub> subs;
  for (const char* name : {"simulate", "verify", "reconstruct", "sweep"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", args.config, "experiment config file")->required()->check(
        CLI::ExistingFile);
    out_opt = sub->add_option("--out", args.out, "run directory (must be new or empty)");
    workers_opt = sub->add_option("--workers", args.workers, "worker threads")
                      ->check(CLI::PositiveNumber);
    seed_opt = sub->add_option("--seed", args.seed, "master seed override");
    subs.push_back({sub, out_opt, workers_opt, seed_opt});
  }

  CLI11_PARSE(app, argc, argv);

  for (const Sub& s : subs) {
    if (!s.app->parsed()) continue;
    patlab::RunOptions opts;
    opts.config_path = args.config;
    if (s.out->count() > 0) opts.out_dir = args.out;
    if (s.workers->count() > 0) opts.workers = args.workers;
    if (s.seed->count() > 0) opts.seed = args.seed;
    return patlab::run_command(s.app->get_name(), opts, std::cout, std::cerr);
  }
  return 2;
}
