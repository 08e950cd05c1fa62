#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "symld/io.hpp"

namespace symld::cli {

inline constexpr int kSchemaVersion = 1;

// A validated experiment description: subcommand, seed, IO, and the
// subcommand-specific parameters. Unknown fields are rejected.
struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string subcommand;
  std::optional<std::uint64_t> seed;
  std::string out;             // empty = stdout
  std::string format = "csv";  // csv | json
  Json params = Json::object();
};

ExperimentConfig config_from_json(const Json& j);
Json config_to_json(const ExperimentConfig& cfg);

// Throws ConfigError when params carry unknown keys or required keys are
// missing for the subcommand; randomized subcommands require a seed.
void validate(const ExperimentConfig& cfg);

}  // namespace symld::cli
