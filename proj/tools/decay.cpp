#include <cmath>

#include "cli.hpp"
#include "tripent/dynamics.hpp"
#include "tripent/effective.hpp"
#include "tripent/errors.hpp"

namespace tripent::cli {

Mat decay_initial_state(const std::string& name, const std::string& path) {
  Sublevel j = Sublevel::Zero;
  Vec nuc;
  if (name == "rho1") {
    j = Sublevel::Plus;
    nuc = nuclear_basis(UD);
  } else if (name == "rho2") {
    nuc = nuclear_basis(UD);
  } else if (name == "rho3") {
    nuc = nuclear_plus_plus();
  } else {
    throw ConfigError(path + ": unknown initial state '" + name + "' (expected rho1, rho2 or rho3)");
  }
  Vec psi = Vec::Zero(kDim);
  for (int k = 0; k < 4; ++k) psi(excited_index(j, k)) = nuc(k);
  return projector(psi);
}

SystemParams with_decay_product(SystemParams p, double x) {
  const double delta0 = 2 * std::abs(couplings(p).a_zero);
  if (delta0 == 0) throw DegenerateInput("delta_0 vanishes; the product delta_0*tau is undefined");
  p.tau_minus = p.tau_zero = p.tau_plus = x / delta0;
  return p;
}

// Samples are returned in the Schrödinger picture on a uniform grid over [0, t_end].
std::vector<TrajectorySample> decay_trajectory(const SystemParams& p, const Mat& rho0, double t_end, int points,
                                               double tol) {
  const Mat h = effective_hamiltonian(p);
  auto ch = decay_channels(h, {p.tau_minus, p.tau_zero, p.tau_plus});
  auto exempt = t0_coherent_pairs(ch);
  const MasterEqSpec spec = make_master_spec(h, ch, Picture::Interaction, exempt);
  IntegrateOptions opt;
  opt.tol = tol;
  for (int k = 0; k < points; ++k) opt.sample_times.push_back(t_end * k / (points - 1));
  IntegrateResult r = integrate_master(rho0, spec, t_end, opt);
  for (auto& s : r.samples) s.rho = to_schroedinger(s.rho, h, s.t);
  return r.samples;
}

// Nuclear state with the mediator (ground and all three triplet sublevels) traced out.
Mat mediator_traced(const Mat& rho16) {
  Mat r = Mat::Zero(4, 4);
  for (int m = 0; m < 4; ++m) r += rho16.block(4 * m, 4 * m, 4, 4);
  return r;
}

CsvTable trajectory_table(const std::vector<TrajectorySample>& samples) {
  std::vector<std::string> header = {"t", "purity", "excited_population", "EF"};
  for (int r = 0; r < kDim; ++r)
    for (int c = 0; c < kDim; ++c) {
      const std::string base = "rho_" + std::to_string(r) + "_" + std::to_string(c);
      header.push_back(base + "_re");
      header.push_back(base + "_im");
    }
  CsvTable table(header);
  for (const auto& s : samples) {
    std::vector<double> row = {s.t, purity(s.rho), excited_population(s.rho),
                               entanglement_of_formation(mediator_traced(s.rho))};
    for (int r = 0; r < kDim; ++r)
      for (int c = 0; c < kDim; ++c) {
        row.push_back(s.rho(r, c).real());
        row.push_back(s.rho(r, c).imag());
      }
    table.add_row(row);
  }
  return table;
}

Json cmd_decay(const RunConfig& cfg) {
  const std::string path = "config.options";
  require_known_keys(cfg.options, path, {"initial", "x", "t_end_tau", "points", "tol"});
  SystemParams p = cfg.params;
  if (cfg.options.contains("x")) p = with_decay_product(p, number_at(cfg.options, "x", path, 0.05));
  const Mat rho0 = decay_initial_state(string_at(cfg.options, "initial", path, "rho2"), path + ".initial");
  const double span = number_at(cfg.options, "t_end_tau", path, 20.0);
  const long points = integer_at(cfg.options, "points", path, 201);
  const double tol = number_at(cfg.options, "tol", path, 1e-8);
  if (!(span > 0)) throw ConfigError(path + ".t_end_tau: must be positive");
  if (points < 2) throw ConfigError(path + ".points: need at least 2");
  if (!(tol > 0)) throw ConfigError(path + ".tol: must be positive");
  const double tau = std::max({p.tau_minus, p.tau_zero, p.tau_plus});
  const auto samples = decay_trajectory(p, rho0, span * tau, static_cast<int>(points), tol);
  trajectory_table(samples).write(cfg.out / "decay.csv");
  return {{"written", Json::array({"decay.csv"})}, {"final_purity", purity(samples.back().rho)}};
}

}  // namespace tripent::cli
