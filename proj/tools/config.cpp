#include <cstdlib>
#include <fstream>

#include "cli.hpp"
#include "tripent/errors.hpp"

namespace tripent::cli {

namespace fs = std::filesystem;

fs::path resolve_config_path(const std::string& given, const std::string& command) {
  const char* env = std::getenv(kConfigDirEnv);
  const fs::path dir = env ? fs::path(env) : fs::path();
  if (!given.empty()) {
    const fs::path p(given);
    if (fs::exists(p)) return p;
    if (!dir.empty() && p.is_relative() && fs::exists(dir / p)) return dir / p;
    throw ConfigError("config file not found: " + given);
  }
  if (dir.empty()) throw ConfigError(std::string("no --config given and ") + kConfigDirEnv + " is unset");
  const fs::path fallback = dir / (command + ".json");
  if (!fs::exists(fallback)) throw ConfigError("config file not found: " + fallback.string());
  return fallback;
}

RunConfig parse_run_config(const Json& doc, const std::string& command, bool validate_params) {
  require_known_keys(doc, "config", {"params", "options", "seed", "jobs"});
  RunConfig cfg;
  cfg.command = command;
  if (!doc.contains("params")) throw ConfigError("config.params: missing");
  cfg.params = params_from_json(doc.at("params"), "config.params", validate_params);
  if (doc.contains("options")) {
    cfg.options = doc.at("options");
    if (!cfg.options.is_object()) throw ConfigError("config.options: expected an object");
  }
  const long seed = integer_at(doc, "seed", "config", 1);
  if (seed < 0) throw ConfigError("config.seed: must be non-negative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  const long jobs = integer_at(doc, "jobs", "config", 0);
  if (jobs < 0) throw ConfigError("config.jobs: must be non-negative");
  cfg.jobs = static_cast<int>(jobs);
  return cfg;
}

int effective_jobs(int jobs) {
  if (jobs > 0) return jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

}  // namespace tripent::cli
