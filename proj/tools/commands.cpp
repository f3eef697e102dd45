#include <cmath>
#include <limits>

#include "cli.hpp"
#include "tripent/dynamics.hpp"
#include "tripent/effective.hpp"
#include "tripent/errors.hpp"

namespace tripent::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool bool_at(const Json& j, const std::string& key, const std::string& path, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) throw ConfigError(path + "." + key + ": expected a boolean");
  return j.at(key).get<bool>();
}

double positive_at(const Json& j, const std::string& key, const std::string& path, double fallback) {
  const double v = number_at(j, key, path, fallback);
  if (!(v > 0)) throw ConfigError(path + "." + key + ": must be positive");
  return v;
}

Sublevel parse_sublevel(const std::string& s, const std::string& path) {
  if (s == "minus") return Sublevel::Minus;
  if (s == "zero") return Sublevel::Zero;
  if (s == "plus") return Sublevel::Plus;
  throw ConfigError(path + ": unknown sublevel '" + s + "' (expected minus, zero or plus)");
}

Json array3(const std::array<double, 3>& a, double scale = 1.0) {
  return Json::array({a[0] * scale, a[1] * scale, a[2] * scale});
}

Json mhz3(const std::array<double, 3>& a) { return array3(a, 1.0 / kTwoPi); }

}  // namespace

Vec parse_nuclear(const std::string& name, const std::string& path) {
  if (name == "dd") return nuclear_basis(DD);
  if (name == "du") return nuclear_basis(DU);
  if (name == "ud") return nuclear_basis(UD);
  if (name == "uu") return nuclear_basis(UU);
  if (name == "plusplus") return nuclear_plus_plus();
  throw ConfigError(path + ": unknown nuclear state '" + name + "' (expected dd, du, ud, uu or plusplus)");
}

ProtocolReport run_protocol(const SystemParams& p, const Json& o, const std::string& path) {
  require_known_keys(o, path,
                     {"name", "nuclear", "switch_time_us", "decay", "omega_drive_mhz", "power_mhz", "tau_us",
                      "sigma_us", "bound", "factor"});
  if (!o.contains("name")) throw ConfigError(path + ".name: missing");
  const std::string name = string_at(o, "name", path, "");
  const double tau = positive_at(o, "tau_us", path, p.tau_zero);
  const double factor = positive_at(o, "factor", path, 0.1);
  const bool has_drive = o.contains("omega_drive_mhz");
  const double drive = kTwoPi * number_at(o, "omega_drive_mhz", path, kNaN);
  const double power = kTwoPi * number_at(o, "power_mhz", path, kNaN);
  auto nuclear = [&](const char* fallback) { return parse_nuclear(string_at(o, "nuclear", path, fallback), path + ".nuclear"); };
  auto need_power = [&] {
    if (!o.contains("power_mhz")) throw ConfigError(path + ".power_mhz: required for protocol '" + name + "'");
  };

  if (name == "symmetric-polarized") {
    const double a = couplings(p).a_plus;
    const double t = positive_at(o, "switch_time_us", path, M_PI / (4 * std::abs(a)));
    return run_symmetric_polarized(p, nuclear("du"), t, bool_at(o, "decay", path, true));
  }
  if (name == "symmetric-mixed") return run_symmetric_mixed(p, nuclear("du"));
  if (name == "cphase-2pi") {
    need_power();
    const double wd = has_drive ? drive : microwave_resonance(p, Sublevel::Plus, UU);
    return cphase_2pi(p, wd, power, tau, nuclear("plusplus"));
  }
  if (name == "cphase-2pi-optimized") {
    const TwoPiOptimum best = optimize_2pi_power(p, tau);
    ProtocolReport r = cphase_2pi(p, microwave_resonance(p, Sublevel::Plus, UU), best.power, tau, nuclear("plusplus"));
    r.diagnostics["power_mhz"] = best.power / kTwoPi;
    r.diagnostics["t_star"] = best.t_star;
    return r;
  }
  if (name == "shelving") return run_shelving(p, nuclear("dd"), positive_at(o, "bound", path, 0.01));
  if (name == "adiabatic") {
    need_power();
    if (!has_drive) throw ConfigError(path + ".omega_drive_mhz: required for protocol 'adiabatic'");
    const double sigma = o.contains("sigma_us") ? positive_at(o, "sigma_us", path, 1.0) : solve_sigma(p, drive, power);
    return run_adiabatic(p, PulseSpec::gaussian(drive, power, sigma), tau, nuclear("plusplus"));
  }
  if (name == "adiabatic-optimized") {
    const AdiabaticOptimum best = optimize_adiabatic(p, tau, factor);
    ProtocolReport r =
        run_adiabatic(p, PulseSpec::gaussian(best.omega_drive, best.power, best.sigma), tau, nuclear("plusplus"));
    r.diagnostics["omega_drive_mhz"] = best.omega_drive / kTwoPi;
    r.diagnostics["power_mhz"] = best.power / kTwoPi;
    return r;
  }
  throw ConfigError(path + ".name: unknown protocol '" + name + "'");
}

double protocol_duration(const ProtocolReport& r) {
  for (const char* key : {"duration", "total_duration"})
    if (auto it = r.diagnostics.find(key); it != r.diagnostics.end()) return it->second;
  return r.event_log.empty() ? 0.0 : r.event_log.back().time;
}

EntanglingPowerResult entangling_power(const SystemParams& p, const Json& o, const std::string& path,
                                       std::uint64_t seed, int jobs) {
  require_known_keys(o, path, {"sublevel", "time_us", "samples"});
  const Sublevel j = parse_sublevel(string_at(o, "sublevel", path, "plus"), path + ".sublevel");
  const long samples = integer_at(o, "samples", path, 100000);
  if (samples < 2) throw ConfigError(path + ".samples: need at least 2");
  EntanglingPowerResult out;
  Mat block;
  double chi = 0;
  if (classify_regime(p)[index(j)] == Regime::Symmetric) {
    const SymmetricSpectrum s = symmetric_spectrum(p);
    out.coupling = s.a[index(j)];
    block = symmetric_block_xy(s, j);
  } else {
    const CrossoverSpectrum c = crossover_spectrum(p);
    out.coupling = c.a[index(j)];
    chi = c.chi[index(j)];
    block = crossover_block(c, j) - c.centre[index(j)] * Mat::Identity(4, 4);
  }
  if (out.coupling == 0) throw DegenerateInput(path + ": coupling a_j vanishes, no entangling time");
  out.time = positive_at(o, "time_us", path, M_PI / (2 * std::abs(out.coupling) * std::sqrt(1 + chi * chi)));
  out.analytic = chi == 0 ? entangling_power_symmetric(out.coupling, out.time)
                          : crossover_entangling_power(out.coupling, chi, out.time);
  out.estimate = entangling_power_mc(propagator(block, out.time), samples, seed, jobs);
  return out;
}

Json cmd_spectrum(const RunConfig& cfg) {
  require_known_keys(cfg.options, "config.options", {});
  const SystemParams& p = cfg.params;
  Json j;
  j["params"] = params_to_json(p);
  const auto regimes = classify_regime(p);
  j["regime"] = {name(regimes[0]), name(regimes[1]), name(regimes[2])};

  const SymmetricSpectrum s = symmetric_spectrum(p);
  Json sym;
  sym["a"] = mhz3(s.a);
  sym["eps"] = mhz3(s.eps);
  sym["delta"] = mhz3(s.delta);
  sym["phi"] = mhz3(s.phi);
  Json energies = Json::array();
  for (const auto& row : s.E) energies.push_back({row[0] / kTwoPi, row[1] / kTwoPi, row[2] / kTwoPi, row[3] / kTwoPi});
  sym["E"] = energies;
  j["symmetric"] = sym;

  const CrossoverSpectrum c = crossover_spectrum(p);
  Json co;
  co["Delta1"] = std::isnan(c.Delta1) ? Json(nullptr) : Json(c.Delta1);
  co["Delta2"] = std::isnan(c.Delta2) ? Json(nullptr) : Json(c.Delta2);
  co["a"] = mhz3(c.a);
  co["f"] = mhz3(c.f);
  co["chi"] = array3(c.chi);
  Json alpha = Json::array(), et = Json::array();
  for (int k = 0; k < 3; ++k) {
    alpha.push_back({{c.alpha[k][0][0], c.alpha[k][0][1]}, {c.alpha[k][1][0], c.alpha[k][1][1]}});
    et.push_back({c.Etilde[k][0] / kTwoPi, c.Etilde[k][1] / kTwoPi, c.Etilde[k][2] / kTwoPi, c.Etilde[k][3] / kTwoPi});
  }
  co["alpha"] = alpha;
  co["Etilde"] = et;
  j["crossover"] = co;

  Json exact = Json::array();
  for (const auto& row : exact_labeled_energies(p))
    exact.push_back({row[0] / kTwoPi, row[1] / kTwoPi, row[2] / kTwoPi, row[3] / kTwoPi});
  j["exact_energies"] = exact;
  j["units"] = "MHz";
  write_text(cfg.out / "spectrum.json", j.dump(2) + "\n");
  return {{"written", Json::array({"spectrum.json"})}};
}

Json cmd_entangling_power(const RunConfig& cfg) {
  const EntanglingPowerResult r = entangling_power(cfg.params, cfg.options, "config.options", cfg.seed, cfg.jobs);
  Json j = {{"mean", r.estimate.mean},   {"std_error", r.estimate.std_error}, {"samples", r.estimate.samples},
            {"seed", r.estimate.seed},   {"analytic", r.analytic},           {"time_us", r.time},
            {"coupling_mhz", r.coupling / kTwoPi}};
  write_text(cfg.out / "entangling_power.json", j.dump(2) + "\n");
  return {{"written", Json::array({"entangling_power.json"})}};
}

Json cmd_protocol(const RunConfig& cfg) {
  const ProtocolReport r = run_protocol(cfg.params, cfg.options, "config.options");
  write_text(cfg.out / "report.json", report_to_json(r).dump(2) + "\n");
  return {{"written", Json::array({"report.json"})}};
}

}  // namespace tripent::cli
