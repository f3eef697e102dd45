#include <cmath>

#include "cli.hpp"
#include "tripent/errors.hpp"

namespace tripent::cli {

namespace {

struct Axis {
  std::string name;
  std::vector<double> values;
};

constexpr const char* kParamFields[] = {"omega_n", "omega_n_prime", "omega_e", "A",        "A_prime",
                                        "D",       "omega_0",       "tau_minus", "tau_zero", "tau_plus",
                                        "p_minus", "p_zero",        "p_plus"};

constexpr const char* kProtocolNumeric[] = {"switch_time_us", "omega_drive_mhz", "power_mhz", "tau_us",
                                            "sigma_us",       "bound",           "factor"};
constexpr const char* kEntanglingNumeric[] = {"time_us", "samples"};

template <std::size_t N>
bool contains(const char* const (&set)[N], const std::string& name) {
  for (const char* f : set)
    if (name == f) return true;
  return false;
}

bool is_param(const std::string& name) {
  for (const char* f : kParamFields)
    if (name == f) return true;
  return name == "A_both";
}

Axis parse_axis(const Json& a, const std::string& path) {
  require_known_keys(a, path, {"name", "values", "from", "to", "points", "scale"});
  Axis axis;
  axis.name = string_at(a, "name", path, "");
  if (axis.name.empty()) throw ConfigError(path + ".name: missing");
  if (a.contains("values")) {
    if (a.contains("from") || a.contains("to") || a.contains("points"))
      throw ConfigError(path + ": give either values or from/to/points");
    const Json& v = a.at("values");
    if (!v.is_array() || v.empty()) throw ConfigError(path + ".values: expected a non-empty array");
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_number()) throw ConfigError(path + ".values[" + std::to_string(k) + "]: expected a number");
      axis.values.push_back(v[k].get<double>());
    }
    return axis;
  }
  for (const char* key : {"from", "to", "points"})
    if (!a.contains(key)) throw ConfigError(path + "." + key + ": missing");
  const double from = number_at(a, "from", path, 0), to = number_at(a, "to", path, 0);
  const long n = integer_at(a, "points", path, 0);
  const std::string scale = string_at(a, "scale", path, "linear");
  if (n < 1) throw ConfigError(path + ".points: must be at least 1");
  if (n > kMaxGridPoints) throw GridTooLarge(path + ".points: " + std::to_string(n) + " exceeds 1e6");
  if (scale != "linear" && scale != "log") throw ConfigError(path + ".scale: expected linear or log");
  if (scale == "log" && !(from > 0 && to > 0)) throw ConfigError(path + ": log scale needs positive bounds");
  for (long k = 0; k < n; ++k) {
    const double u = n == 1 ? 0.0 : static_cast<double>(k) / (n - 1);
    const double v = scale == "log" ? std::exp(std::log(from) + u * (std::log(to) - std::log(from)))
                                    : from + u * (to - from);
    // Endpoints are exact so that grid points coincide with directly configured values.
    axis.values.push_back(k == 0 ? from : k == n - 1 ? to : v);
  }
  return axis;
}

}  // namespace

Json cmd_sweep(const RunConfig& cfg) {
  const std::string path = "config.options";
  const Json& o = cfg.options;
  require_known_keys(o, path, {"target", "protocol", "entangling_power", "axes"});
  const std::string target = string_at(o, "target", path, "protocol");
  if (target != "protocol" && target != "entangling-power")
    throw ConfigError(path + ".target: expected protocol or entangling-power");
  const std::string opt_key = target == "protocol" ? "protocol" : "entangling_power";
  const Json base_opts = o.contains(opt_key) ? o.at(opt_key) : Json::object();
  if (!base_opts.is_object()) throw ConfigError(path + "." + opt_key + ": expected an object");

  if (!o.contains("axes") || !o.at("axes").is_array() || o.at("axes").empty())
    throw ConfigError(path + ".axes: expected a non-empty array");
  std::vector<Axis> axes;
  long total = 1;
  for (std::size_t k = 0; k < o.at("axes").size(); ++k) {
    const std::string ap = path + ".axes[" + std::to_string(k) + "]";
    axes.push_back(parse_axis(o.at("axes")[k], ap));
    const Axis& a = axes.back();
    const bool option = target == "protocol" ? contains(kProtocolNumeric, a.name)
                                             : contains(kEntanglingNumeric, a.name) || a.name == "seed";
    if (!is_param(a.name) && !option)
      throw ConfigError(ap + ".name: unknown axis '" + a.name + "'");
    const long n = static_cast<long>(a.values.size());
    if (total > kMaxGridPoints / n) throw GridTooLarge("sweep grid exceeds 1e6 points");
    total *= n;
  }

  const Json base_params = params_to_json(cfg.params);
  auto point = [&](std::size_t flat) {
    std::vector<double> coords(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
      coords[k] = axes[k].values[flat % axes[k].values.size()];
      flat /= axes[k].values.size();
    }
    return coords;
  };

  auto evaluate = [&](std::size_t flat) -> std::vector<double> {
    const std::vector<double> coords = point(flat);
    Json params = base_params, opts = base_opts;
    std::uint64_t seed = cfg.seed;
    for (std::size_t k = 0; k < axes.size(); ++k) {
      const std::string& n = axes[k].name;
      if (n == "A_both") {
        params["A"] = params["A_prime"] = coords[k];
      } else if (is_param(n)) {
        params[n] = coords[k];
      } else if (n == "seed") {
        if (coords[k] < 0 || coords[k] != std::floor(coords[k])) throw ConfigError("sweep seed values must be non-negative integers");
        seed = static_cast<std::uint64_t>(coords[k]);
      } else if (n == "samples") {
        opts[n] = static_cast<long>(coords[k]);
      } else {
        opts[n] = coords[k];
      }
    }
    const SystemParams p = params_from_json(params, "sweep point params");
    std::vector<double> row = coords;
    if (target == "protocol") {
      const ProtocolReport r = run_protocol(p, opts, path + ".protocol");
      row.insert(row.end(), {r.ef, r.fidelity_to_target, protocol_duration(r)});
    } else {
      const EntanglingPowerResult r = entangling_power(p, opts, path + ".entangling_power", seed, 1);
      row.insert(row.end(), {r.estimate.mean, r.estimate.std_error, r.analytic});
    }
    return row;
  };

  const auto rows = parallel_map<std::vector<double>>(static_cast<std::size_t>(total), cfg.jobs, evaluate);
  std::vector<std::string> header;
  for (const Axis& a : axes) header.push_back(a.name);
  if (target == "protocol")
    header.insert(header.end(), {"EF", "fidelity", "duration"});
  else
    header.insert(header.end(), {"mean", "std_error", "analytic"});
  CsvTable table(header);
  for (const auto& row : rows) table.add_row(row);
  table.write(cfg.out / "sweep.csv");
  return {{"written", Json::array({"sweep.csv"})}, {"points", total}};
}

}  // namespace tripent::cli
