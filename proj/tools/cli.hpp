#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "tripent/dynamics.hpp"
#include "tripent/io.hpp"
#include "tripent/measures.hpp"

namespace tripent::cli {

inline constexpr const char* kConfigDirEnv = "TRIPENT_CONFIG_DIR";
inline constexpr long kMaxGridPoints = 1'000'000;

struct RunConfig {
  std::string command;
  SystemParams params;
  Json options = Json::object();
  std::uint64_t seed = 1;
  int jobs = 0;  // 0: all cores
  std::filesystem::path out;
};

// Resolution order: explicit path, then relative to $TRIPENT_CONFIG_DIR, then $TRIPENT_CONFIG_DIR/<command>.json.
std::filesystem::path resolve_config_path(const std::string& given, const std::string& command);
// Top-level keys: params, options, seed, jobs. `options` keys are checked by each command.
RunConfig parse_run_config(const Json& doc, const std::string& command, bool validate_params = true);

int effective_jobs(int jobs);

// Evaluates f(0..n-1) on up to `jobs` threads; results keep index order and the lowest-index failure is rethrown.
template <class T>
std::vector<T> parallel_map(std::size_t n, int jobs, const std::function<T(std::size_t)>& f) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> err(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        out[i] = f(i);
      } catch (...) {
        err[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(effective_jobs(jobs), std::max<std::size_t>(n, 1));
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : err)
    if (e) std::rethrow_exception(e);
  return out;
}

Vec parse_nuclear(const std::string& name, const std::string& path);

// Protocol options are shared by `protocol` and `sweep`; frequencies are MHz, times µs.
ProtocolReport run_protocol(const SystemParams& p, const Json& options, const std::string& path);
// Duration of the active part of a protocol, read back from its report.
double protocol_duration(const ProtocolReport& r);

struct EntanglingPowerResult {
  EntanglingPowerEstimate estimate;
  double analytic = 0;
  double time = 0;
  double coupling = 0;
};
EntanglingPowerResult entangling_power(const SystemParams& p, const Json& options, const std::string& path,
                                       std::uint64_t seed, int jobs);

// Named decay initial states: rho1 (T+, up-down), rho2 (T0, up-down), rho3 (T0, uniform superposition).
Mat decay_initial_state(const std::string& name, const std::string& path);
// Sets every lifetime so that delta_0 * tau = x.
SystemParams with_decay_product(SystemParams p, double x);
std::vector<TrajectorySample> decay_trajectory(const SystemParams& p, const Mat& rho0, double t_end, int points,
                                               double tol = 1e-8);
CsvTable trajectory_table(const std::vector<TrajectorySample>& samples);

// Each command writes its files under cfg.out and returns a JSON summary; validation failures throw.
Json cmd_spectrum(const RunConfig& cfg);
Json cmd_entangling_power(const RunConfig& cfg);
Json cmd_decay(const RunConfig& cfg);
Json cmd_protocol(const RunConfig& cfg);
Json cmd_sweep(const RunConfig& cfg);
Json cmd_figure(const RunConfig& cfg, const std::string& name);
// Returns the report and whether every validation passed.
std::pair<Json, bool> cmd_validate(const RunConfig& cfg);

}  // namespace tripent::cli
