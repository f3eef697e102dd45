#include <cmath>
#include <cstdio>

#include "cli.hpp"
#include "tripent/effective.hpp"
#include "tripent/errors.hpp"

namespace tripent::cli {

namespace {

const std::string kPath = "config.options";

std::vector<double> linspace(double a, double b, long n) {
  std::vector<double> v;
  for (long k = 0; k < n; ++k) v.push_back(n == 1 ? a : a + (b - a) * k / (n - 1));
  return v;
}

std::vector<double> logspace(double a, double b, long n) {
  std::vector<double> v = linspace(std::log(a), std::log(b), n);
  for (double& x : v) x = std::exp(x);
  v.front() = a;
  v.back() = b;
  return v;
}

long points_at(const Json& o, long fallback) {
  const long n = integer_at(o, "points", kPath, fallback);
  if (n < 2) throw ConfigError(kPath + ".points: need at least 2");
  if (n > kMaxGridPoints) throw GridTooLarge(kPath + ".points exceeds 1e6");
  return n;
}

std::vector<double> values_at(const Json& o, const std::string& key, std::vector<double> fallback) {
  if (!o.contains(key)) return fallback;
  const Json& v = o.at(key);
  if (!v.is_array() || v.empty()) throw ConfigError(kPath + "." + key + ": expected a non-empty array");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number()) throw ConfigError(kPath + "." + key + "[" + std::to_string(k) + "]: expected a number");
    out.push_back(v[k].get<double>());
  }
  return out;
}

std::string label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

Json written(const std::string& file) { return {{"written", Json::array({file})}}; }

// Entangling powers of the T₊ and T₀ XY blocks against a₊t.
Json fig4(const RunConfig& cfg) {
  require_known_keys(cfg.options, kPath, {"points", "span"});
  const Couplings c = couplings(cfg.params);
  const double span = number_at(cfg.options, "span", kPath, 2 * M_PI);
  CsvTable t({"a_plus_t", "e_plus", "e_zero"});
  for (double x : linspace(0, span, points_at(cfg.options, 401))) {
    const double time = x / c.a_plus;
    t.add_row({x, entangling_power_symmetric(c.a_plus, time), entangling_power_symmetric(c.a_zero, time)});
  }
  t.write(cfg.out / "fig4.csv");
  return written("fig4.csv");
}

// Purity during decay for the three named initial states, with δ₀τ = x.
Json fig5(const RunConfig& cfg) {
  require_known_keys(cfg.options, kPath, {"points", "x", "t_end_tau"});
  const SystemParams p = with_decay_product(cfg.params, number_at(cfg.options, "x", kPath, 0.05));
  const double t_end = number_at(cfg.options, "t_end_tau", kPath, 20.0) * p.tau_zero;
  const int n = static_cast<int>(points_at(cfg.options, 201));
  const std::vector<std::string> names = {"rho1", "rho2", "rho3"};
  const auto runs = parallel_map<std::vector<TrajectorySample>>(3, cfg.jobs, [&](std::size_t k) {
    return decay_trajectory(p, decay_initial_state(names[k], kPath), t_end, n);
  });
  CsvTable t({"t", "purity_rho1", "purity_rho2", "purity_rho3"});
  for (int k = 0; k < n; ++k)
    t.add_row({runs[0][k].t, purity(runs[0][k].rho), purity(runs[1][k].rho), purity(runs[2][k].rho)});
  t.write(cfg.out / "fig5.csv");
  return written("fig5.csv");
}

// EF of the polarized and triplet-mixture protocols against A = A′.
Json fig6(const RunConfig& cfg) {
  require_known_keys(cfg.options, kPath, {"points", "A_min_mhz", "A_max_mhz"});
  const auto grid = logspace(number_at(cfg.options, "A_min_mhz", kPath, 0.01),
                             number_at(cfg.options, "A_max_mhz", kPath, 100.0), points_at(cfg.options, 33));
  const auto rows = parallel_map<std::vector<double>>(grid.size(), cfg.jobs, [&](std::size_t k) {
    SystemParams p = cfg.params;
    p.A = p.A_prime = kTwoPi * grid[k];
    const double a = couplings(p).a_plus;
    const double pol = run_symmetric_polarized(p, nuclear_basis(DU), M_PI / (4 * std::abs(a))).ef;
    return std::vector<double>{grid[k], pol, run_symmetric_mixed(p, nuclear_basis(DU)).ef};
  });
  CsvTable t({"A_mhz", "EF_polarized", "EF_mixed"});
  for (const auto& r : rows) t.add_row(r);
  t.write(cfg.out / "fig6.csv");
  return written("fig6.csv");
}

// Crossover entangling power against a t for several asymmetries χ.
Json fig7(const RunConfig& cfg) {
  require_known_keys(cfg.options, kPath, {"points", "span", "chi"});
  const auto chis = values_at(cfg.options, "chi", {0.0, 0.5, 1.0, 2.0});
  std::vector<std::string> header = {"a_t"};
  for (double chi : chis) header.push_back("e_chi_" + label(chi));
  CsvTable t(header);
  for (double x : linspace(0, number_at(cfg.options, "span", kPath, 2 * M_PI), points_at(cfg.options, 401))) {
    std::vector<double> row = {x};
    for (double chi : chis) row.push_back(crossover_entangling_power(1.0, chi, x));
    t.add_row(row);
  }
  t.write(cfg.out / "fig7.csv");
  return written("fig7.csv");
}

// Maximal attainable entangling power m(χ).
Json fig8(const RunConfig& cfg) {
  require_known_keys(cfg.options, kPath, {"points", "chi_max"});
  CsvTable t({"chi", "m"});
  for (double chi : linspace(0, number_at(cfg.options, "chi_max", kPath, 5.0), points_at(cfg.options, 501)))
    t.add_row({chi, max_entangling_power(chi)});
  t.write(cfg.out / "fig8-demo.csv");
  return written("fig8-demo.csv");
}

// m_j over relative Zeeman (Δ₁) and hyperfine (Δ₂) asymmetries around the configured A, ω_n.
Json fig9(const RunConfig& cfg) {
  require_known_keys(cfg.options, kPath, {"points", "delta_min", "delta_max"});
  const SystemParams& base = cfg.params;
  if (base.omega_n == 0 || base.A == 0) throw DegenerateInput("fig9: omega_n and A must be nonzero");
  const auto grid = linspace(number_at(cfg.options, "delta_min", kPath, -1.0),
                             number_at(cfg.options, "delta_max", kPath, 1.0), points_at(cfg.options, 81));
  CsvTable t({"Delta1", "Delta2", "m_minus", "m_zero", "m_plus"});
  for (double d1 : grid)
    for (double d2 : grid) {
      SystemParams p = base;
      p.omega_n_prime = base.omega_n * (1 + d1);
      p.A_prime = base.A * (1 + d2);
      const CrossoverSpectrum c = crossover_spectrum(p);
      t.add_row({d1, d2, max_entangling_power(c.chi[0]), max_entangling_power(c.chi[1]),
                 max_entangling_power(c.chi[2])});
    }
  t.write(cfg.out / "fig9.csv");
  return written("fig9.csv");
}

// Optimized 2π-pulse EF* over a grid of (A, A′) at lifetime τ.
Json fig11(const RunConfig& cfg) {
  require_known_keys(cfg.options, kPath, {"A_mhz", "A_prime_mhz", "tau_us"});
  const auto as = values_at(cfg.options, "A_mhz", {1, 2, 4, 8});
  const auto aps = values_at(cfg.options, "A_prime_mhz", as);
  const double tau = number_at(cfg.options, "tau_us", kPath, 10.0);
  if (!(tau > 0)) throw ConfigError(kPath + ".tau_us: must be positive");
  const auto rows = parallel_map<std::vector<double>>(as.size() * aps.size(), cfg.jobs, [&](std::size_t k) {
    SystemParams p = cfg.params;
    p.A = kTwoPi * as[k / aps.size()];
    p.A_prime = kTwoPi * aps[k % aps.size()];
    const TwoPiOptimum o = optimize_2pi_power(p, tau);
    return std::vector<double>{p.A / kTwoPi, p.A_prime / kTwoPi, o.power / kTwoPi, o.ef, o.t_star};
  });
  CsvTable t({"A_mhz", "A_prime_mhz", "power_mhz", "EF_star", "t_star_us"});
  for (const auto& r : rows) t.add_row(r);
  t.write(cfg.out / "fig11.csv");
  return written("fig11.csv");
}

// Excited-level populations after each pulse of the shelving sequence.
Json fig12(const RunConfig& cfg) {
  require_known_keys(cfg.options, kPath, {"bound"});
  const double bound = number_at(cfg.options, "bound", kPath, 0.01);
  std::vector<Vec> snaps;
  const ProtocolReport r = run_shelving(cfg.params, nuclear_basis(DD), bound, &snaps);
  std::vector<std::string> header = {"step", "t_end_us", "duration_us"};
  const char* nuc[4] = {"dd", "du", "ud", "uu"};
  for (Sublevel j : kSublevels)
    for (int k = 0; k < 4; ++k) header.push_back(std::string("pop_") + name(j) + "_" + nuc[k]);
  CsvTable t(header);
  for (std::size_t s = 0; s < snaps.size(); ++s) {
    const double start = r.event_log[s].time, end = r.event_log[s + 1].time;
    std::vector<double> row = {static_cast<double>(s + 1), end, end - start};
    for (int i = 0; i < kExcitedDim; ++i) row.push_back(std::norm(snaps[s](i)));
    t.add_row(row);
  }
  t.write(cfg.out / "fig12.csv");
  write_text(cfg.out / "fig12_report.json", report_to_json(r).dump(2) + "\n");
  return {{"written", Json::array({"fig12.csv", "fig12_report.json"})}, {"fidelity", r.fidelity_to_target}};
}

}  // namespace

Json cmd_figure(const RunConfig& cfg, const std::string& name) {
  if (name == "fig4") return fig4(cfg);
  if (name == "fig5") return fig5(cfg);
  if (name == "fig6") return fig6(cfg);
  if (name == "fig7") return fig7(cfg);
  if (name == "fig8-demo") return fig8(cfg);
  if (name == "fig9") return fig9(cfg);
  if (name == "fig11") return fig11(cfg);
  if (name == "fig12") return fig12(cfg);
  throw UnknownFigure("unknown figure '" + name +
                      "' (expected fig4, fig5, fig6, fig7, fig8-demo, fig9, fig11 or fig12)");
}

}  // namespace tripent::cli
