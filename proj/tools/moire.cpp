#include <omp.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>

#include "moire/commands.hpp"
#include "moire/error.hpp"

namespace {

void apply_thread_cap() {
  const char* env = std::getenv("MOIRE_THREADS");
  if (!env || !*env) return;
  try {
    const int n = std::stoi(env);
    if (n > 0) omp_set_num_threads(n);
  } catch (const std::exception&) {
    std::cerr << "warning: ignoring MOIRE_THREADS=" << env << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relaxation of bilayer moire superlattices and domain-wall analysis"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int grid = 0;
  bool quiet = false;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "YAML run configuration")->required();
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--grid", grid, "grid size N (overrides the config)")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", quiet, "suppress progress and summary output");
  };
  auto* relax = app.add_subcommand("relax", "minimize the bilayer energy");
  auto* dwall = app.add_subcommand("dwall", "solve the one-dimensional domain-wall problem");
  auto* sweep = app.add_subcommand("sweep", "relax a parameter sweep and measure wall widths");
  auto* map = app.add_subcommand("gsfe-map", "render the misfit energy density over the moire cell");
  for (auto* s : {relax, dwall, sweep, map}) common(s);

  CLI11_PARSE(app, argc, argv);
  apply_thread_cap();

  try {
    moire::RunConfig cfg = moire::load_config(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (grid > 0) cfg.solver.grid = grid;
    moire::CommandContext ctx;
    if (!quiet) {
      ctx.log = &std::cerr;
      ctx.out = &std::cout;
    }
    if (*relax) return moire::cmd_relax(cfg, ctx);
    if (*dwall) return moire::cmd_dwall(cfg, ctx);
    if (*sweep) return moire::cmd_sweep(cfg, ctx);
    return moire::cmd_gsfe_map(cfg, ctx);
  } catch (const moire::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return moire::kConfigError;
  } catch (const moire::DegenerateConfiguration& e) {
    std::cerr << "degenerate configuration: " << e.what() << '\n';
    return moire::kConfigError;
  } catch (const moire::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return moire::kConfigError;
  } catch (const moire::NoMoire& e) {
    std::cerr << "no moire pattern: " << e.what() << '\n';
    return moire::kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return moire::kRowFailed;
  }
}
