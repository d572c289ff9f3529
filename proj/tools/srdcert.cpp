// srdcert <config> [--output DIR] [--seed N] [-v]

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "srd/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Short-range dependence certificates for ID moving-average random fields"};
  std::string config;
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
  app.add_option("config", config, "run configuration file")->required()->check(CLI::ExistingFile);
  app.add_option("-o,--output", output, "output directory (overrides SRDCERT_OUTPUT_DIR and the config)");
  app.add_option("-s,--seed", seed, "seed override");
  app.add_flag("-v,--verbose", verbose, "progress messages on stderr");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : srd::cli::kRejected;
  }

  srd::cli::RunOptions opts;
  if (output) opts.output = *output;
  opts.seed = seed;
  opts.verbose = verbose;
  return srd::cli::run(config, opts, std::cout, std::cerr);
}
