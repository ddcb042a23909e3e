#include <exception>
#include <string>

#include "CLI11.hpp"

#include "cutplane/errors.hpp"
#include "cutplane/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Cutting plane solvers with maintained leverage scores"};
  app.require_subcommand(1);
  cutplane::io::CommandArgs args;
  std::uint64_t seed = 0;
  for (const char* name : {"feasibility", "saddle", "convex", "market_ad", "market_fisher", "bench_leverage"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--instance", args.instance, "instance JSON")->required();
    sub->add_option("--config", args.config, "solver config JSON");
    sub->add_option("--seed", seed, "master seed; required for randomized runs");
    sub->add_option("--out", args.out, "output directory")->required();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  CLI::App* sub = app.get_subcommands().front();
  args.command = sub->get_name();
  if (sub->count("--seed") > 0) args.seed = seed;
  try {
    return cutplane::io::run_command(args);
  } catch (const cutplane::ConvergenceError& e) {
    // Out of budget is a solver-level failure, not a usage error.
    cutplane::io::log(cutplane::io::LogLevel::Quiet, std::string("no answer: ") + e.what());
    return 2;
  } catch (const std::exception& e) {
    cutplane::io::log(cutplane::io::LogLevel::Quiet, std::string("error: ") + e.what());
    return 1;
  }
}
