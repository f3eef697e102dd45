#include <cmath>

#include "cli.hpp"
#include "tripent/effective.hpp"
#include "tripent/errors.hpp"

namespace tripent::cli {

namespace {

Json check(const std::string& name, bool passed, const std::string& message) {
  return {{"name", name}, {"passed", passed}, {"message", message}};
}

Json mhz(const std::array<double, 3>& a) { return {a[0] / kTwoPi, a[1] / kTwoPi, a[2] / kTwoPi}; }

}  // namespace

std::pair<Json, bool> cmd_validate(const RunConfig& cfg) {
  require_known_keys(cfg.options, "config.options", {});
  const SystemParams& p = cfg.params;
  Json report;
  report["params"] = params_to_json(p);
  Json checks = Json::array();

  bool valid = true;
  try {
    p.validate();
    checks.push_back(check("params_valid", true, "omega_e > 0, lifetimes positive, populations sum to 1"));
  } catch (const Error& e) {
    valid = false;
    checks.push_back(check("params_valid", false, e.what()));
  }
  const bool perturbative = valid && p.perturbative_ok();
  if (valid)
    checks.push_back(check("perturbative", perturbative,
                           perturbative ? "|omega_n|, |D|, A much smaller than omega_e"
                                        : "need |omega_n|, |D|, A much smaller than omega_e"));
  report["checks"] = checks;
  const bool passed = valid && perturbative;
  report["passed"] = passed;
  if (!passed) return {report, false};

  const auto regimes = classify_regime(p);
  report["regime"] = {{"minus", name(regimes[0])}, {"zero", name(regimes[1])}, {"plus", name(regimes[2])}};

  const Couplings c = couplings(p), cp = couplings_prime(p);
  const CrossoverSpectrum co = crossover_spectrum(p);
  report["couplings"] = {{"a", {c.a_minus / kTwoPi, c.a_zero / kTwoPi, c.a_plus / kTwoPi}},
                         {"a_prime", {cp.a_minus / kTwoPi, cp.a_zero / kTwoPi, cp.a_plus / kTwoPi}},
                         {"f", mhz(co.f)},
                         {"chi", {co.chi[0], co.chi[1], co.chi[2]}},
                         {"order", "minus, zero, plus"},
                         {"units", "MHz"}};

  // Asymmetry separations against the second-order couplings they must dominate.
  const double dA = p.A_prime - p.A, dn = p.omega_n_prime - p.omega_n;
  report["asymmetry"] = {
      {"plus_separation", 0.5 * std::abs(dA + dn) / kTwoPi},
      {"minus_separation", 0.5 * std::abs(dA - dn) / kTwoPi},
      {"zero_separation", 0.5 * std::abs(dn) / kTwoPi},
      {"max_coupling_pm", std::max({std::abs(c.a_plus), std::abs(c.a_minus), std::abs(cp.a_plus), std::abs(cp.a_minus)}) / kTwoPi},
      {"max_coupling_zero", std::max(std::abs(c.a_zero), std::abs(cp.a_zero)) / kTwoPi}};

  const double build_plus = M_PI / (2 * std::abs(c.a_plus)), build_minus = M_PI / (2 * std::abs(c.a_minus));
  const double unwind = c.a_zero == 0 ? INFINITY : M_PI / (2 * std::abs(c.a_zero));
  const bool symmetric = regimes[0] == Regime::Symmetric && regimes[1] == Regime::Symmetric &&
                         regimes[2] == Regime::Symmetric;
  report["lifetime_hierarchy"] = {
      {"applicable", symmetric},
      {"entangling_time_plus_us", build_plus},
      {"entangling_time_minus_us", build_minus},
      {"unwinding_time_zero_us", std::isinf(unwind) ? Json(nullptr) : Json(unwind)},
      {"plus_builds_before_decay", build_plus < p.tau_plus},
      {"minus_builds_before_decay", build_minus < p.tau_minus},
      {"zero_decays_before_unwinding", p.tau_zero < unwind},
      {"holds", build_plus < p.tau_plus && build_minus < p.tau_minus && p.tau_zero < unwind}};

  const TransitionSpectrum t = transition_spectrum(p, false);
  report["transitions"] = {{"rf", mhz(t.rf)},
                           {"rf_prime", mhz(t.rf_prime)},
                           {"mw_plus_zero", {t.mw[0][0] / kTwoPi, t.mw[0][1] / kTwoPi, t.mw[0][2] / kTwoPi, t.mw[0][3] / kTwoPi}},
                           {"mw_zero_minus", {t.mw[1][0] / kTwoPi, t.mw[1][1] / kTwoPi, t.mw[1][2] / kTwoPi, t.mw[1][3] / kTwoPi}},
                           {"nuclear_order", "dd, du, ud, uu"},
                           {"units", "MHz"}};
  return {report, true};
}

}  // namespace tripent::cli
