#include <CLI11.hpp>

#include <utility>

#include "ricciwarp/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Prescribed Ricci curvature on doubly warped products"};
  app.require_subcommand(1, 1);
  std::string config, out = ".";
  int workers = 1;
  const std::pair<const char*, const char*> commands[] = {
      {"validate", "check the tensor hypotheses"},
      {"solve", "find the critical scaling and the metric"},
      {"sweep", "solve over a list of parameter values"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "TOML run configuration")->required();
    sub->add_option("--out", out, "output directory")->required();
    sub->add_option("--workers", workers, "concurrent sweep points")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ricciwarp::exit_code::usage;
  }
  return ricciwarp::run_command(app.get_subcommands().front()->get_name(), config, out, workers);
}
