#pragma once

#include <string>

#include "config.hpp"

namespace symld::cli {

struct RunOutcome {
  std::string content;  // the file body (csv or json)
  Json record;          // the result record logged to stderr
};

// Dispatches the config to its subcommand and renders the output. Throws the
// library's typed errors; does not touch the filesystem except to read the
// input files named in the config.
RunOutcome run(const ExperimentConfig& cfg);

// Full CLI: parses argv, runs, writes the output atomically, maps errors to
// exit codes (0 ok, 2 config/input, 3 caps, 4 non-convergence, 5 internal).
int main_with_args(int argc, char** argv);

}  // namespace symld::cli
