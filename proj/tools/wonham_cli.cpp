#include <iostream>

#include "CLI11.hpp"
#include "wonham/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Stability diagnostics for finite-state Wonham filters"};
  app.require_subcommand(1);

  wonham::CommandOptions options;
  app.add_option("--out", options.out_dir, "Output directory (default: $WONHAM_OUT_DIR or ./wonham_out)");
  app.add_option("--threads", options.workers, "Worker threads (0 = all cores or $WONHAM_THREADS)");

  std::string model_path;
  auto* analyze = app.add_subcommand("analyze", "Observable space, ergodic classes and detectability of a model");
  analyze->add_option("model", model_path, "Model JSON file")->required();

  std::string divergence_path;
  bool no_svg = false;
  auto* divergence = app.add_subcommand("divergence", "Monte-Carlo chi-square decay curves and fitted rates");
  divergence->add_option("config", divergence_path, "Experiment JSON file")->required();
  divergence->add_flag("--no-svg", no_svg, "Skip the SVG plot");

  std::string backward_path;
  auto* backward = app.add_subcommand("backward", "Backward-map estimates and variance identities");
  backward->add_option("config", backward_path, "Backward JSON file")->required();

  wonham::Table1Command table1;
  std::size_t n_paths = 0;
  auto* reproduce = app.add_subcommand("reproduce-table1", "Five-case reference experiment");
  reproduce->add_option("--seed", table1.seed, "Master seed");
  reproduce->add_flag("--quick", table1.quick, "100 paths per case, widened tolerances");
  reproduce->add_option("--n-paths", n_paths, "Override the number of paths per case");

  // Global options are also accepted after the subcommand name.
  for (auto* sub : {analyze, divergence, backward, reproduce}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : wonham::kExitConfig;
  }

  try {
    if (*analyze) return wonham::cmd_analyze(model_path, options, std::cout);
    if (*divergence) return wonham::cmd_divergence(divergence_path, options, !no_svg, std::cout);
    if (*backward) return wonham::cmd_backward(backward_path, options, std::cout);
    if (n_paths > 0) table1.n_paths = n_paths;
    return wonham::cmd_reproduce_table1(table1, options, std::cout, std::cerr);
  } catch (const wonham::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return wonham::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return wonham::kExitNumerical;
  }
}
