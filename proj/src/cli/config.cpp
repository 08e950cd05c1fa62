#include "config.hpp"

#include <map>
#include <set>
#include <vector>

#include "symld/errors.hpp"

namespace symld::cli {

namespace {

const std::map<std::string, std::set<std::string>>& param_whitelist() {
  static const std::map<std::string, std::set<std::string>> wl{
      {"sample", {"n", "draws", "layer1"}},
      {"exact-ld", {"mu", "n", "target"}},
      {"rate", {"rate", "nu", "mu"}},
      {"project", {"reference", "common_marginal", "observables", "ball"}},
      {"transport", {"op", "rho", "nu", "ground", "gamma", "sample"}},
      {"bridge", {"beta", "grid", "n", "draws", "phi", "layer1"}},
      {"verify", {"suite", "inject_fault"}},
  };
  return wl;
}

const std::map<std::string, std::set<std::string>>& required_params() {
  static const std::map<std::string, std::set<std::string>> rq{
      {"sample", {"n", "draws", "layer1"}},
      {"exact-ld", {"mu", "n", "target"}},
      {"rate", {"rate", "nu", "mu"}},
      {"project", {"reference"}},
      {"transport", {"op"}},
      {"bridge", {"beta", "grid", "n", "draws", "phi", "layer1"}},
      {"verify", {"suite"}},
  };
  return rq;
}

bool needs_seed(const std::string& sub) {
  return sub == "sample" || sub == "bridge" || sub == "verify" ||
         sub == "transport";  // transport project breaks ties at random
}

}  // namespace

ExperimentConfig config_from_json(const Json& j) {
  static const std::set<std::string> top{"schema_version", "subcommand", "seed", "out", "format",
                                         "params"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!top.count(key)) throw ConfigError("unknown config field: " + key);
  }
  ExperimentConfig cfg;
  if (!j.contains("schema_version")) throw ConfigError("config requires schema_version");
  cfg.schema_version = j.at("schema_version").get<int>();
  if (cfg.schema_version != kSchemaVersion) throw ConfigError("unsupported schema_version");
  if (!j.contains("subcommand")) throw ConfigError("config requires subcommand");
  cfg.subcommand = j.at("subcommand").get<std::string>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
  if (j.contains("format")) cfg.format = j.at("format").get<std::string>();
  if (j.contains("params")) cfg.params = j.at("params");
  validate(cfg);
  return cfg;
}

Json config_to_json(const ExperimentConfig& cfg) {
  Json j{{"schema_version", cfg.schema_version},
         {"subcommand", cfg.subcommand},
         {"out", cfg.out},
         {"format", cfg.format},
         {"params", cfg.params}};
  if (cfg.seed) j["seed"] = *cfg.seed;
  return j;
}

void validate(const ExperimentConfig& cfg) {
  const auto& wl = param_whitelist();
  const auto it = wl.find(cfg.subcommand);
  if (it == wl.end()) throw ConfigError("unknown subcommand: " + cfg.subcommand);
  if (!cfg.params.is_object()) throw ConfigError("params must be an object");
  for (const auto& [key, value] : cfg.params.items()) {
    (void)value;
    if (!it->second.count(key)) {
      throw ConfigError("unknown parameter for " + cfg.subcommand + ": " + key);
    }
  }
  for (const auto& req : required_params().at(cfg.subcommand)) {
    if (!cfg.params.contains(req)) {
      throw ConfigError(cfg.subcommand + " requires parameter: " + req);
    }
  }
  if (cfg.format != "csv" && cfg.format != "json") throw ConfigError("format must be csv or json");
  if (needs_seed(cfg.subcommand) && !cfg.seed) {
    throw ConfigError(cfg.subcommand + " requires a seed");
  }
}

}  // namespace symld::cli
