#include "tripent/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "tripent/errors.hpp"
#include "tripent/measures.hpp"

namespace tripent {

PulseSpec PulseSpec::top_hat_2pi(double omega_drive, double power, std::string target) {
  if (!(power > 0)) throw InvalidParams("top_hat_2pi: power must be > 0");
  PulseSpec s;
  s.shape = Shape::TopHat;
  s.omega_drive = omega_drive;
  s.power = power;
  s.duration = kTwoPi / (std::sqrt(2.0) * power);
  s.target = std::move(target);
  return s;
}

PulseSpec PulseSpec::gaussian(double omega_drive, double power, double sigma, std::string target) {
  if (!(sigma > 0)) throw InvalidParams("gaussian pulse: sigma must be > 0");
  PulseSpec s;
  s.shape = Shape::Gaussian;
  s.omega_drive = omega_drive;
  s.power = power;
  s.sigma = sigma;
  s.target = std::move(target);
  return s;
}

double PulseSpec::envelope(double t) const {
  if (shape == Shape::TopHat) return (t >= 0 && t <= duration) ? power : 0.0;
  if (std::abs(t) > 3 * sigma) return 0.0;
  const double x = t / sigma;
  return power * std::exp(-x * x);
}

double PulseSpec::length() const { return shape == Shape::TopHat ? duration : 6 * sigma; }

Vec nuclear_basis(int nuc) {
  if (nuc < 0 || nuc > 3) throw InvalidState("nuclear_basis: index out of range");
  return Vec::Unit(4, nuc);
}

Vec nuclear_plus_plus() { return Vec::Constant(4, cplx(0.5)); }

Mat deexcite(const Mat& rho16) {
  if (rho16.rows() != kDim || rho16.cols() != kDim) throw DimensionMismatch("deexcite expects 16x16");
  Mat out = rho16.topLeftCorner(4, 4);
  for (Sublevel j : kSublevels) {
    const int o = excited_index(j, 0);
    out += rho16.block(o, o, 4, 4);
  }
  return out;
}

double conditional_phase(const std::array<double, 4>& theta) {
  const double c = theta[DD] - theta[DU] - theta[UD] + theta[UU];
  return std::remainder(c, kTwoPi) == -M_PI ? M_PI : std::remainder(c, kTwoPi);
}

namespace {

Vec normalized_nuclear(const Vec& psi) {
  if (psi.size() != 4) throw DimensionMismatch("nuclear state must have 4 components");
  const double n = psi.norm();
  if (!(n > 0)) throw InvalidState("nuclear state has zero norm");
  return psi / n;
}

Vec excited_state(Sublevel j, const Vec& nuc) {
  Vec v = Vec::Zero(kDim);
  for (int i = 0; i < 4; ++i) v(excited_index(j, i)) = nuc(i);
  return v;
}

// Instantaneous ideal µw π-pulse: permutation of T₀ ↔ T_j, nuclear state untouched.
Mat sublevel_swap(Sublevel j) {
  Mat p = Mat::Identity(kDim, kDim);
  for (int i = 0; i < 4; ++i) {
    const int a = excited_index(Sublevel::Zero, i), b = excited_index(j, i);
    p(a, a) = p(b, b) = 0;
    p(a, b) = p(b, a) = 1;
  }
  return p;
}

// Worst-case state-health figures over every sampled point of every integration.
struct Health {
  double trace_error = 0, hermiticity_error = 0, min_eigenvalue = 0, excited_increase = 0;
  double last_excited = 2;

  void observe(const Mat& rho) {
    trace_error = std::max(trace_error, std::abs(rho.trace() - cplx(1.0)));
    hermiticity_error = std::max(hermiticity_error, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
    min_eigenvalue = std::min(min_eigenvalue, tripent::min_eigenvalue(hermitian_part(rho)));
    const double ex = excited_population(rho);
    if (last_excited <= 1) excited_increase = std::max(excited_increase, ex - last_excited);
    last_excited = ex;
  }

  void write(ProtocolReport& r) const {
    r.diagnostics["trace_error"] = trace_error;
    r.diagnostics["hermiticity_error"] = hermiticity_error;
    r.diagnostics["min_eigenvalue"] = min_eigenvalue;
    r.diagnostics["excited_increase"] = excited_increase;
  }
};

double longest_lifetime(const MasterEqSpec& spec) {
  double min_rate = 0;
  for (const DecayChannel& c : spec.channels) min_rate = min_rate == 0 ? c.rate : std::min(min_rate, c.rate);
  return min_rate > 0 ? 1.0 / (2 * min_rate) : 0.0;
}

// Evolve a Schrödinger-picture ρ for `duration` with the interaction-picture spec. With `drain`, integration stops
// once the excited population falls below kDrainedPopulation and the remainder is propagated coherently.
Mat evolve(const Mat& rho0, const MasterEqSpec& spec, double duration, bool drain, Health& health,
           double tol = 1e-9) {
  if (duration <= 0) return rho0;
  const double tau = longest_lifetime(spec);
  const double chunk = tau > 0 ? std::min(duration, 2 * tau) : duration;
  Mat rho = rho0;  // interaction picture, origin at segment start
  double t = 0;
  while (t < duration) {
    const double t_next = std::min(duration, t + chunk);
    IntegrateOptions opt;
    opt.tol = tol;
    opt.t0 = t;
    for (int k = 1; k <= 8; ++k) opt.sample_times.push_back(t + (t_next - t) * k / 8.0);
    IntegrateResult r = integrate_master(rho, spec, t_next, opt);
    for (const TrajectorySample& s : r.samples) health.observe(s.rho);
    rho = r.rho;
    t = t_next;
    if (drain && t < duration && excited_population(rho) < kDrainedPopulation) {
      const Mat u = propagator(spec.hamiltonian, duration - t);
      return u * to_schroedinger(rho, spec.hamiltonian, t) * u.adjoint();
    }
  }
  return to_schroedinger(rho, spec.hamiltonian, duration);
}

// Natural decay until the excited population drops below kDrainedPopulation.
Mat drain(const Mat& rho0, const MasterEqSpec& spec, Health& health, double& elapsed) {
  const double tau = longest_lifetime(spec);
  Mat rho = rho0;
  elapsed = 0;
  for (int round = 0; round < 200 && excited_population(rho) >= kDrainedPopulation; ++round) {
    rho = evolve(rho, spec, 2 * tau, false, health);
    elapsed += 2 * tau;
  }
  return rho;
}

// Only the T₀ coherent pair keeps its cross term; every other pair is secularized, T± pairs included,
// since a hard 30/τ cutoff on those makes the outcome jump as the T± splittings cross it.
std::vector<std::pair<int, int>> symmetric_exempt(const std::vector<DecayChannel>& ch) {
  return close_exempt_pairs(static_cast<int>(ch.size()), t0_coherent_pairs(ch));
}

void require_symmetric(const SystemParams& p, const char* who) {
  for (Regime r : classify_regime(p))
    if (r != Regime::Symmetric) throw WrongRegime(std::string(who) + ": parameters are not in the symmetric regime");
}

MasterEqSpec symmetric_spec(const SystemParams& p) {
  const Mat h = effective_hamiltonian(p);
  auto ch = decay_channels(h, {p.tau_minus, p.tau_zero, p.tau_plus});
  auto ex = symmetric_exempt(ch);
  return make_master_spec(h, std::move(ch), Picture::Interaction, ex);
}

void finish(ProtocolReport& r, const Mat& nuc) {
  Mat rho = hermitian_part(nuc);
  const double tr = rho.trace().real();
  if (!(tr > 0)) throw InvalidState("protocol left no nuclear population");
  rho /= tr;
  require_density_matrix(rho, 1e-8);
  r.final_nuclear_state = rho;
  r.ef = entanglement_of_formation(rho);
}

// Decay-free nuclear state of the polarized sequence at `switch_time`.
Vec ideal_polarized_state(const SystemParams& p, const Vec& psi, double switch_time) {
  const Mat swap = sublevel_swap(Sublevel::Plus);
  // Only T₊ is populated; removing its mean energy keeps ω_e·t phases out of the propagator.
  Mat h = effective_hamiltonian(p);
  const int o = excited_index(Sublevel::Plus, 0);
  h -= h.block(o, o, 4, 4).trace() / 4.0 * Mat::Identity(kDim, kDim);
  const Vec v = swap * propagator(h, switch_time) * swap * excited_state(Sublevel::Zero, psi);
  return v.segment(excited_index(Sublevel::Zero, 0), 4);
}

// Decay-free nuclear state of |T₋⟩⊗ψ after free evolution for `t`.
Vec ideal_minus_state(const SystemParams& p, const Vec& psi, double t) {
  Mat h = effective_hamiltonian(p);
  const int o = excited_index(Sublevel::Minus, 0);
  h -= h.block(o, o, 4, 4).trace() / 4.0 * Mat::Identity(kDim, kDim);
  return (propagator(h, t) * excited_state(Sublevel::Minus, psi)).segment(o, 4);
}

void lifetime_hierarchy_check(const SystemParams& p, const SymmetricSpectrum& s, ProtocolReport& r) {
  // π/(2a_±) < τ_± ≪ π/(2|a₀|), with ≪ read as a factor 10.
  const bool ok = M_PI / (2 * s.a_plus) < p.tau_plus && M_PI / (2 * s.a_minus) < p.tau_minus &&
                  10 * p.tau_zero < M_PI / (2 * std::abs(s.a_zero));
  r.diagnostics["lifetime_hierarchy_ok"] = ok ? 1.0 : 0.0;
  if (!ok) r.event_log.push_back({0.0, "warning: LifetimeHierarchyViolated"});
}

}  // namespace

ProtocolReport run_symmetric_polarized(const SystemParams& p, const Vec& nuclear0, double switch_time, bool decay) {
  p.validate();
  require_symmetric(p, "run_symmetric_polarized");
  if (switch_time < 0) throw InvalidParams("switch_time must be >= 0");
  const Vec psi = normalized_nuclear(nuclear0);
  const SymmetricSpectrum s = symmetric_spectrum(p);
  ProtocolReport r;
  lifetime_hierarchy_check(p, s, r);
  const Mat swap = sublevel_swap(Sublevel::Plus);
  Mat rho = projector(excited_state(Sublevel::Zero, psi));
  r.event_log.push_back({0.0, "excite |T0>"});
  rho = swap * rho * swap;
  r.event_log.push_back({0.0, "mw swap T0<->T+"});
  if (!decay) {
    const Vec ideal = ideal_polarized_state(p, psi, switch_time);
    r.event_log.push_back({switch_time, "mw swap T+<->T0"});
    r.event_log.push_back({switch_time, "ideal de-excitation"});
    finish(r, projector(ideal));
    r.fidelity_to_target = fidelity(r.final_nuclear_state, ideal);
    r.diagnostics["residual_excited"] = 0.0;
    return r;
  }
  const MasterEqSpec spec = symmetric_spec(p);
  Health health;
  health.observe(rho);
  rho = evolve(rho, spec, switch_time, true, health);
  rho = swap * rho * swap;
  r.event_log.push_back({switch_time, "mw swap T+<->T0"});
  double waited = 0;
  rho = drain(rho, spec, health, waited);
  r.event_log.push_back({switch_time + waited, "excitation drained"});
  r.diagnostics["residual_excited"] = excited_population(rho);
  r.diagnostics["exempt_pairs"] = static_cast<double>(spec.exempt_pairs.size());
  health.write(r);
  finish(r, ground_state_block(rho));
  r.fidelity_to_target = fidelity(r.final_nuclear_state, ideal_polarized_state(p, psi, switch_time));
  return r;
}

ProtocolReport run_symmetric_mixed(const SystemParams& p, const Vec& nuclear0) {
  p.validate();
  require_symmetric(p, "run_symmetric_mixed");
  const Vec psi = normalized_nuclear(nuclear0);
  const SymmetricSpectrum s = symmetric_spectrum(p);
  ProtocolReport r;
  lifetime_hierarchy_check(p, s, r);
  Mat rho = Mat::Zero(kDim, kDim);
  for (Sublevel j : kSublevels) rho += p.population(j) * projector(excited_state(j, psi));
  r.event_log.push_back({0.0, "excite triplet mixture"});
  const MasterEqSpec spec = symmetric_spec(p);
  Health health;
  health.observe(rho);

  const double t1 = M_PI / (4 * s.a_plus);
  rho = evolve(rho, spec, t1, true, health);
  const Mat swap_plus = sublevel_swap(Sublevel::Plus);
  rho = swap_plus * rho * swap_plus;
  r.event_log.push_back({t1, "mw swap T0<->T+"});

  // T₀ counts as emptied after 5τ₀. Stage 2 fires at an odd multiple of π/(4a₋); consecutive odd multiples
  // give conjugate Bell phases, so take the first one whose T₋ branch matches the T₊ branch state.
  const double emptied = t1 + 5 * p.tau_zero;
  const double quarter = M_PI / (4 * s.a_minus);
  double k = std::ceil(emptied / quarter);
  if (std::fmod(k, 2.0) == 0.0) k += 1;
  const Vec plus_branch = ideal_polarized_state(p, psi, t1);
  if (std::norm(plus_branch.dot(ideal_minus_state(p, psi, k * quarter))) <
      std::norm(plus_branch.dot(ideal_minus_state(p, psi, (k + 2) * quarter))))
    k += 2;
  const double t2 = k * quarter;
  rho = evolve(rho, spec, t2 - t1, true, health);
  const Mat swap_minus = sublevel_swap(Sublevel::Minus);
  rho = swap_minus * rho * swap_minus;
  r.event_log.push_back({t2, "mw swap T0<->T-"});
  r.diagnostics["stage2_multiple"] = k;

  double waited = 0;
  rho = drain(rho, spec, health, waited);
  r.event_log.push_back({t2 + waited, "excitation drained"});
  r.diagnostics["residual_excited"] = excited_population(rho);
  health.write(r);
  finish(r, ground_state_block(rho));
  r.fidelity_to_target = fidelity(r.final_nuclear_state, ideal_polarized_state(p, psi, t1));
  return r;
}

Mat microwave_hamiltonian(const SystemParams& p, double omega_drive, double power) {
  const SpinOperators& so = spin_operators();
  Mat h = Mat::Zero(kDim, kDim);
  h.topLeftCorner(4, 4) = ground_block(p);
  h.bottomRightCorner(kExcitedDim, kExcitedDim) =
      effective_excited_block(p) + kron(power * so.Sx_e - omega_drive * so.Sz_e, Mat::Identity(4, 4));
  return h;
}

double microwave_resonance(const SystemParams& p, Sublevel upper, int nuc) {
  const auto e = exact_labeled_energies(p);
  const double zero = e[index(Sublevel::Zero)][nuc];
  switch (upper) {
    case Sublevel::Plus: return zero - e[index(Sublevel::Plus)][nuc];
    case Sublevel::Minus: return e[index(Sublevel::Minus)][nuc] - zero;
    default: throw InvalidParams("microwave_resonance: upper must be T+ or T-");
  }
}

Mat cphase_2pi_t0_map(const SystemParams& p, double omega_drive, double power) {
  const PulseSpec pulse = PulseSpec::top_hat_2pi(omega_drive, power);
  const Mat u = propagator(microwave_hamiltonian(p, omega_drive, power), pulse.duration);
  const int o = excited_index(Sublevel::Zero, 0);
  return u.block(o, o, 4, 4);
}

ProtocolReport cphase_2pi(const SystemParams& p, double omega_drive, double power, double tau, const Vec& nuclear0) {
  p.validate();
  if (!(tau > 0)) throw InvalidParams("cphase_2pi: tau must be > 0");
  const Vec psi = normalized_nuclear(nuclear0);
  const PulseSpec pulse = PulseSpec::top_hat_2pi(omega_drive, power, "T+ uu <-> T0 uu");
  const Mat h = microwave_hamiltonian(p, omega_drive, power);
  const MasterEqSpec spec = make_master_spec(h, decay_channels(h, tau), Picture::Interaction);

  ProtocolReport r;
  Health health;
  Mat rho = projector(excited_state(Sublevel::Zero, psi));
  health.observe(rho);
  r.event_log.push_back({0.0, "excite |T0>; top-hat mw pulse on"});
  rho = evolve(rho, spec, pulse.duration, true, health);
  r.event_log.push_back({pulse.duration, "mw pulse off; ideal de-excitation"});
  r.diagnostics["duration"] = pulse.duration;
  r.diagnostics["residual_excited"] = excited_population(rho);
  r.diagnostics["exempt_pairs"] = static_cast<double>(spec.exempt_pairs.size());
  health.write(r);

  const Mat m = cphase_2pi_t0_map(p, omega_drive, power);
  std::array<double, 4> theta{};
  for (int i = 0; i < 4; ++i) theta[i] = std::arg(m(i, i));
  r.diagnostics["conditional_phase"] = conditional_phase(theta);
  finish(r, deexcite(rho));
  const Vec ideal = m * psi;
  r.fidelity_to_target = ideal.norm() > 0 ? fidelity(r.final_nuclear_state, Vec(ideal / ideal.norm())) : 0.0;
  return r;
}

namespace {

double golden_max(const std::function<double(double)>& f, double lo, double hi, double rel_tol) {
  const double g = (std::sqrt(5.0) - 1) / 2;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while ((b - a) > rel_tol * std::max(std::abs(a), std::abs(b)) * 0.5) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

}  // namespace

TwoPiOptimum optimize_2pi_power(const SystemParams& p, double tau, int points_per_decade) {
  if (points_per_decade < 1) throw InvalidParams("points_per_decade must be >= 1");
  const double omega_drive = microwave_resonance(p, Sublevel::Plus, UU);
  auto ef_at = [&](double power) { return cphase_2pi(p, omega_drive, power, tau).ef; };
  // Powers in rad/µs spanning [1e-3, 1e2] MHz.
  const int decades = 5;
  const int n = decades * points_per_decade + 1;
  TwoPiOptimum out;
  int best = 0;
  for (int k = 0; k < n; ++k) {
    const double power = kTwoPi * std::pow(10.0, -3.0 + static_cast<double>(k) / points_per_decade);
    out.grid.emplace_back(power, ef_at(power));
    if (out.grid[k].second > out.grid[best].second) best = k;
  }
  if (best == 0 || best == n - 1)
    throw OptimizationFailed("optimize_2pi_power: grid maximum on the boundary of the power range");
  // Golden section in log Ω₀ between the neighbours of the grid maximum.
  auto in_log = [&](double x) { return ef_at(std::exp(x)); };
  const double x = golden_max(in_log, std::log(out.grid[best - 1].first), std::log(out.grid[best + 1].first), 1e-3);
  out.power = std::exp(x);
  out.ef = ef_at(out.power);
  if (out.grid[best].second > out.ef) {
    out.power = out.grid[best].first;
    out.ef = out.grid[best].second;
  }
  out.t_star = kTwoPi / (std::sqrt(2.0) * out.power);
  return out;
}

double rabi_leakage(double rabi, double detuning) {
  if (rabi == 0 && detuning == 0) throw DegenerateInput("rabi_leakage: rabi and detuning both zero");
  return rabi * rabi / (rabi * rabi + detuning * detuning);
}

SelectivePulse plan_selective_pulse(double target, const std::vector<double>& neighbors, double bound,
                                    double flip_angle) {
  if (!(bound > 0 && bound < 1)) throw InvalidParams("plan_selective_pulse: bound must lie in (0, 1)");
  if (neighbors.empty()) throw InvalidParams("plan_selective_pulse: no neighbouring transitions given");
  double gap = std::numeric_limits<double>::infinity();
  for (double nb : neighbors) gap = std::min(gap, std::abs(target - nb));
  if (!(gap > 1e-12 * std::max(1.0, std::abs(target))))
    throw NoSeparation("plan_selective_pulse: a neighbouring transition coincides with the target");
  SelectivePulse out;
  out.rabi = gap * std::sqrt(bound / (1 - bound));
  out.duration = flip_angle / out.rabi;
  return out;
}

namespace {

// One rectangular pulse in the interaction picture of the diagonal excited Hamiltonian (energies e):
// each coupled pair keeps only its near-resonant rotating component, detuned by |E_l − E_k| − ω.
Vec apply_pulse(const RVec& e, const Mat& x, double omega, double t0, double duration, const Vec& psi) {
  const int n = static_cast<int>(e.size());
  Eigen::MatrixXd det = Eigen::MatrixXd::Zero(n, n);
  double fastest = 0;
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k) {
      if (x(l, k) == cplx(0.0)) continue;
      const double w = e(l) - e(k);
      det(l, k) = w - (w > 0 ? omega : -omega);
      fastest = std::max({fastest, std::abs(det(l, k)), std::abs(x(l, k))});
    }
  auto h_at = [&](double t) {
    Mat h = Mat::Zero(n, n);
    for (int l = 0; l < n; ++l)
      for (int k = 0; k < n; ++k)
        if (x(l, k) != cplx(0.0)) h(l, k) = x(l, k) * std::exp(I * det(l, k) * t);
    return h;
  };
  const long steps = std::max(200L, static_cast<long>(std::ceil(duration * fastest * 40)));
  const double dt = duration / steps;
  Vec v = psi;
  for (long s = 0; s < steps; ++s) {
    const double t = t0 + s * dt;
    const Mat h1 = h_at(t), h2 = h_at(t + dt / 2), h3 = h_at(t + dt);
    const Vec k1 = -I * (h1 * v);
    const Vec k2 = -I * (h2 * (v + dt / 2 * k1));
    const Vec k3 = -I * (h2 * (v + dt / 2 * k2));
    const Vec k4 = -I * (h3 * (v + dt * k3));
    v += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return v;
}

int ex12(Sublevel j, int nuc) { return excited_index(j, nuc) - 4; }

struct TransitionRef {
  Sublevel j;
  int from, to;  // nuclear states (rf) or the shared nuclear state (mw, from == to)
  Sublevel j_to;
};

struct ShelvingPlan {
  Sublevel shelf;
  std::array<SelectivePulse, 4> pulses;
  std::array<double, 4> freq;
  double total = 0;
};

ShelvingPlan plan_shelving(const SystemParams& p, Sublevel shelf, double bound) {
  const auto e = exact_labeled_energies(p);
  auto en = [&](Sublevel j, int nuc) { return e[index(j)][nuc]; };
  auto rf = [&](Sublevel j, int a, int b) { return std::abs(en(j, b) - en(j, a)); };
  auto mw = [&](Sublevel j, int nuc) { return std::abs(en(j, nuc) - en(Sublevel::Zero, nuc)); };
  // rf neighbours: every single-nucleus flip out of a populated level except the intended one.
  auto rf_neighbors = [&](const std::vector<std::pair<Sublevel, int>>& populated, Sublevel tj, int ta, int tb) {
    std::vector<double> out;
    for (auto [j, nuc] : populated)
      for (int flip : {1, 2}) {
        const int other = nuc ^ flip;
        const bool intended = j == tj && ((nuc == ta && other == tb) || (nuc == tb && other == ta));
        if (!intended) out.push_back(rf(j, nuc, other));
      }
    return out;
  };
  // mw neighbours: every T₀ ↔ T± line touching a populated level except the intended one.
  auto mw_neighbors = [&](const std::vector<std::pair<Sublevel, int>>& populated, Sublevel tj, int tnuc) {
    std::vector<double> out;
    for (auto [j, nuc] : populated)
      for (Sublevel u : {Sublevel::Minus, Sublevel::Plus}) {
        if (j != Sublevel::Zero && j != u) continue;
        if (u == tj && nuc == tnuc) continue;
        out.push_back(mw(u, nuc));
      }
    return out;
  };
  const Sublevel z = Sublevel::Zero;
  ShelvingPlan plan;
  plan.shelf = shelf;
  plan.freq[0] = rf(z, DD, UD);
  plan.pulses[0] = plan_selective_pulse(plan.freq[0], rf_neighbors({{z, DD}, {z, UD}}, z, DD, UD), bound, M_PI / 2);
  plan.freq[1] = mw(shelf, DD);
  plan.pulses[1] = plan_selective_pulse(plan.freq[1], mw_neighbors({{z, DD}, {z, UD}, {shelf, DD}}, shelf, DD),
                                        bound, M_PI);
  plan.freq[2] = rf(z, UD, UU);
  plan.pulses[2] = plan_selective_pulse(plan.freq[2], rf_neighbors({{z, UD}, {z, UU}, {shelf, DD}}, z, UD, UU),
                                        bound, M_PI);
  plan.freq[3] = mw(shelf, DD);
  plan.pulses[3] = plan_selective_pulse(plan.freq[3], mw_neighbors({{shelf, DD}, {z, DD}, {z, UU}}, shelf, DD),
                                        bound, M_PI);
  for (const SelectivePulse& sp : plan.pulses) plan.total += sp.duration;
  return plan;
}

}  // namespace

ProtocolReport run_shelving(const SystemParams& p, const Vec& nuclear0, double bound, std::vector<Vec>* snapshots) {
  p.validate();
  for (Regime r : classify_regime(p))
    if (r != Regime::Asymmetric) throw WrongRegime("run_shelving: parameters are not in the asymmetric regime");
  const Vec psi = normalized_nuclear(nuclear0);
  // Shelve into whichever T± gives the shorter sequence.
  ShelvingPlan plan = plan_shelving(p, Sublevel::Minus, bound);
  const ShelvingPlan alt = plan_shelving(p, Sublevel::Plus, bound);
  if (alt.total < plan.total) plan = alt;

  const SpinOperators& so = spin_operators();
  const Mat h0 = effective_excited_block(p);
  const RVec e = h0.diagonal().real();
  const Mat id3 = Mat::Identity(3, 3), id4 = Mat::Identity(4, 4);
  // rf drives both nuclei with equal Rabi frequency; Ω·S_x has pair element Ω/2.
  const Mat rf_x = kron(id3, so.Sx_n + so.Sx_np);
  // mw couples T₀ to both T±; ⟨T₀|S_x,e|T±⟩ = 1/√2, so amplitude Ω/√2 gives Rabi frequency Ω.
  const Mat mw_x = kron(so.Sx_e, id4);

  ProtocolReport r;
  Vec v = excited_state(Sublevel::Zero, psi).segment(4, kExcitedDim);  // interaction picture of h0
  double t = 0;
  const char* names[4] = {"rf pi/2 on n (T0)", "mw shelf T0 dd", "rf pi on n' (T0)", "mw unshelf dd"};
  for (int k = 0; k < 4; ++k) {
    const SelectivePulse& sp = plan.pulses[k];
    const bool is_rf = k == 0 || k == 2;
    const Mat x = is_rf ? Mat(sp.rabi * rf_x) : Mat((sp.rabi / std::sqrt(2.0)) * mw_x);
    v = apply_pulse(e, x, plan.freq[k], t, sp.duration, v);
    r.event_log.push_back({t, names[k]});
    if (snapshots) snapshots->push_back(v);
    r.diagnostics["pulse" + std::to_string(k + 1) + "_duration"] = sp.duration;
    t += sp.duration;
  }
  for (int i = 0; i < kExcitedDim; ++i) v(i) *= std::exp(-I * e(i) * t);
  r.event_log.push_back({t, "sequence complete; ideal de-excitation"});
  r.diagnostics["total_duration"] = t;
  r.diagnostics["shelf_sublevel"] = value(plan.shelf);
  const double a = std::abs(v(ex12(Sublevel::Zero, DD))), b = std::abs(v(ex12(Sublevel::Zero, UU)));
  // Bell fidelity up to a relative phase, which a local z rotation removes.
  r.fidelity_to_target = 0.5 * (a + b) * (a + b);
  Vec full = Vec::Zero(kDim);
  full.segment(4, kExcitedDim) = v;
  finish(r, deexcite(projector(full)));
  return r;
}

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
  const double m = (a + b) / 2, lm = (a + m) / 2, rm = (m + b) / 2;
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm), right = (b - m) / 6 * (fm + 4 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15 * tol) return left + right + diff / 15;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double integrate_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), fm = f((a + b) / 2);
  return adaptive_simpson(f, a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), tol, 50);
}

// Phase per unit σ: sgn(Δ)·½∫_{−3}^{3}(√(Δ² + 2Ω₀²e^{−2x²}) − |Δ|) dx, written without cancellation.
double phase_rate(double delta, double power, double tol = 1e-8) {
  if (power == 0) return 0.0;
  const double d = std::abs(delta);
  auto f = [&](double x) {
    const double y = 2 * power * power * std::exp(-2 * x * x);
    return y / (std::sqrt(d * d + y) + d);
  };
  const double v = 0.5 * integrate_simpson(f, -3.0, 3.0, tol);
  return delta < 0 ? -v : v;
}

const int kCombSign[4] = {1, -1, -1, 1};

double comb_rate(const std::array<double, 4>& delta1, double power) {
  double g = 0;
  for (int i = 0; i < 4; ++i) g += kCombSign[i] * phase_rate(delta1[i], power);
  return g;
}

double energy(const RVec& e, Sublevel j, int nuc) { return e(excited_index(j, nuc)); }

RVec effective_diagonal(const SystemParams& p) { return effective_hamiltonian(p).diagonal().real(); }

bool perturbation_ok(const std::array<double, 4>& delta2, double power, double factor) {
  for (double d : delta2)
    if (!(power / std::sqrt(2.0) < factor * std::abs(d))) return false;
  return true;
}

}  // namespace

std::array<double, 4> adiabatic_detunings_low(const SystemParams& p, double omega_drive) {
  const RVec e = effective_diagonal(p);
  std::array<double, 4> out{};
  for (int i = 0; i < 4; ++i) out[i] = energy(e, Sublevel::Minus, i) - energy(e, Sublevel::Zero, i) - omega_drive;
  return out;
}

std::array<double, 4> adiabatic_detunings_high(const SystemParams& p, double omega_drive) {
  const RVec e = effective_diagonal(p);
  std::array<double, 4> out{};
  for (int i = 0; i < 4; ++i) out[i] = energy(e, Sublevel::Zero, i) - energy(e, Sublevel::Plus, i) - omega_drive;
  return out;
}

std::array<double, 4> adiabatic_phases(const SystemParams& p, double omega_drive, double power, double sigma,
                                       double adiabatic_factor) {
  p.validate();
  if (!(sigma >= 0) || !(power >= 0)) throw InvalidParams("adiabatic_phases: power and sigma must be >= 0");
  if (!perturbation_ok(adiabatic_detunings_high(p, omega_drive), power, adiabatic_factor))
    throw PerturbationCondViolated("adiabatic_phases: drive too strong for the T+ <-> T0 detunings");
  const auto delta1 = adiabatic_detunings_low(p, omega_drive);
  std::array<double, 4> theta{};
  for (int i = 0; i < 4; ++i) theta[i] = sigma * phase_rate(delta1[i], power);
  return theta;
}

double solve_sigma(const SystemParams& p, double omega_drive, double power) {
  p.validate();
  if (!(power > 0)) throw InvalidParams("solve_sigma: power must be > 0");
  if (!perturbation_ok(adiabatic_detunings_high(p, omega_drive), power, 0.1))
    throw PerturbationCondViolated("solve_sigma: drive too strong for the T+ <-> T0 detunings");
  const double g = comb_rate(adiabatic_detunings_low(p, omega_drive), power);
  if (!(std::abs(g) > 1e-14 * power)) throw NoSolution("solve_sigma: the signed phase integral vanishes");
  return M_PI / std::abs(g);
}

bool adiabatic_constraints_ok(const SystemParams& p, double omega_drive, double power, double sigma,
                              double factor) {
  if (!perturbation_ok(adiabatic_detunings_high(p, omega_drive), power, factor)) return false;
  for (double d : adiabatic_detunings_low(p, omega_drive))
    if (!(power / (d * d) < factor * sigma)) return false;
  return true;
}

Mat adiabatic_state_hamiltonian(double delta1, double delta2, double rabi) {
  Mat h = Mat::Zero(3, 3);
  h(0, 0) = delta1;
  h(2, 2) = -delta2;
  h(0, 1) = h(1, 0) = rabi / std::sqrt(2.0);
  return h;
}

namespace {

Mat frame_hamiltonian(const RVec& e, const std::array<double, 4>& d1, const std::array<double, 4>& d2, double rabi) {
  Mat h = Mat::Zero(kDim, kDim);
  for (int i = 0; i < 4; ++i) {
    h(i, i) = e(i) - energy(e, Sublevel::Zero, i);
    const Mat hi = adiabatic_state_hamiltonian(d1[i], d2[i], rabi);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) h(excited_index(kSublevels[a], i), excited_index(kSublevels[b], i)) = hi(a, b);
  }
  return h;
}

}  // namespace

Mat adiabatic_hamiltonian(const SystemParams& p, const PulseSpec& pulse, double t) {
  return frame_hamiltonian(effective_diagonal(p), adiabatic_detunings_low(p, pulse.omega_drive),
                           adiabatic_detunings_high(p, pulse.omega_drive), pulse.envelope(t));
}

ProtocolReport run_adiabatic(const SystemParams& p, const PulseSpec& pulse, double tau, const Vec& nuclear0) {
  p.validate();
  if (pulse.shape != PulseSpec::Shape::Gaussian) throw InvalidParams("run_adiabatic: pulse must be Gaussian");
  if (!(tau > 0)) throw InvalidParams("run_adiabatic: tau must be > 0");
  const Vec psi = normalized_nuclear(nuclear0);
  const Mat h_eff = effective_hamiltonian(p);
  MasterEqSpec spec = make_master_spec(h_eff, decay_channels(h_eff, tau), Picture::Schroedinger);
  const RVec e = effective_diagonal(p);
  const auto d1 = adiabatic_detunings_low(p, pulse.omega_drive);
  const auto d2 = adiabatic_detunings_high(p, pulse.omega_drive);
  spec.hamiltonian_at = [&](double t) { return frame_hamiltonian(e, d1, d2, pulse.envelope(t)); };

  const double half = 3 * pulse.sigma, length = pulse.length();
  ProtocolReport r;
  Health health;
  Mat rho = projector(excited_state(Sublevel::Zero, psi));
  health.observe(rho);
  r.event_log.push_back({0.0, "excite |T0>; gaussian mw pulse on"});
  IntegrateOptions opt;
  opt.tol = 1e-11;
  opt.t0 = -half;
  for (int k = 1; k <= 16; ++k) opt.sample_times.push_back(-half + length * k / 16.0);
  const IntegrateResult res = integrate_master(rho, spec, half, opt);
  for (const TrajectorySample& s : res.samples) health.observe(s.rho);
  rho = res.rho;
  r.event_log.push_back({length, "mw pulse off; ideal de-excitation"});
  r.diagnostics["residual_excited"] = excited_population(rho);
  r.diagnostics["sigma"] = pulse.sigma;
  r.diagnostics["duration"] = length;
  health.write(r);

  // Back to the lab frame: every block of nuclear state i carries e^{−iE_{0,i}·length}.
  Vec lab_phase(4);
  for (int i = 0; i < 4; ++i) lab_phase(i) = std::exp(-I * energy(e, Sublevel::Zero, i) * length);
  Mat nuc = deexcite(rho);
  nuc = lab_phase.asDiagonal() * nuc * lab_phase.conjugate().asDiagonal();

  std::array<double, 4> theta{};
  for (int i = 0; i < 4; ++i) {
    theta[i] = pulse.sigma * phase_rate(d1[i], pulse.power);
    r.diagnostics["theta_" + std::to_string(i + 1)] = theta[i];
  }
  r.diagnostics["conditional_phase"] = conditional_phase(theta);
  finish(r, nuc);
  Vec target(4);
  for (int i = 0; i < 4; ++i) target(i) = psi(i) * std::exp(I * theta[i]) * lab_phase(i);
  r.fidelity_to_target = fidelity(r.final_nuclear_state, target);
  return r;
}

namespace {

struct AdiabaticPoint {
  bool ok = false;
  double sigma = std::numeric_limits<double>::infinity();
};

AdiabaticPoint adiabatic_point(const SystemParams& p, double omega_drive, double power, double factor) {
  AdiabaticPoint out;
  if (!perturbation_ok(adiabatic_detunings_high(p, omega_drive), power, factor)) return out;
  const auto d1 = adiabatic_detunings_low(p, omega_drive);
  for (double d : d1)
    if (d == 0) return out;
  const double g = comb_rate(d1, power);
  if (!(std::abs(g) > 1e-14 * power)) return out;
  const double sigma = M_PI / std::abs(g);
  for (double d : d1)
    if (!(power / (d * d) < factor * sigma)) return out;
  out.ok = true;
  out.sigma = sigma;
  return out;
}

}  // namespace

AdiabaticOptimum optimize_adiabatic(const SystemParams& p, double tau, double factor) {
  p.validate();
  for (Regime r : classify_regime(p))
    if (r != Regime::Asymmetric) throw WrongRegime("optimize_adiabatic: parameters are not in the asymmetric regime");
  if (!(factor > 0)) throw InvalidParams("optimize_adiabatic: factor must be > 0");
  const auto lines = adiabatic_detunings_low(p, 0.0);
  const double centre = (lines[0] + lines[1] + lines[2] + lines[3]) / 4;
  const double spread = std::max(1e-3, *std::max_element(lines.begin(), lines.end()) -
                                           *std::min_element(lines.begin(), lines.end()));
  const double far = 4 * std::abs(p.D) + 4 * spread;

  // Search coordinates: drive offset sign, log|offset|, log Ω₀; 10 points per decade.
  const double lo_off = std::log(1e-2 * spread), hi_off = std::log(far);
  const double lo_pow = std::log(1e-3 * kTwoPi), hi_pow = std::log(1e3 * kTwoPi);
  const double step = std::log(10.0) / 10;
  auto eval = [&](int sgn, double u, double v) { return adiabatic_point(p, centre + sgn * std::exp(u), std::exp(v), factor); };

  int best_sgn = 0;
  double best_u = 0, best_v = 0, best_sigma = std::numeric_limits<double>::infinity();
  for (int sgn : {-1, 1})
    for (double u = lo_off; u <= hi_off + 1e-12; u += step)
      for (double v = lo_pow; v <= hi_pow + 1e-12; v += step) {
        const AdiabaticPoint a = eval(sgn, u, v);
        if (a.ok && a.sigma < best_sigma) {
          best_sigma = a.sigma;
          best_sgn = sgn;
          best_u = u;
          best_v = v;
        }
      }
  if (best_sgn == 0) throw Infeasible("optimize_adiabatic: no grid point satisfies the constraints");

  // Local pattern search in (log|offset|, log Ω₀).
  for (double h = step; h > 1e-5;) {
    bool moved = false;
    for (auto [du, dv] : {std::pair{h, 0.0}, {-h, 0.0}, {0.0, h}, {0.0, -h}, {h, h}, {-h, -h}, {h, -h}, {-h, h}}) {
      const AdiabaticPoint a = eval(best_sgn, best_u + du, best_v + dv);
      if (a.ok && a.sigma < best_sigma) {
        best_sigma = a.sigma;
        best_u += du;
        best_v += dv;
        moved = true;
        break;
      }
    }
    if (!moved) h /= 2;
  }

  AdiabaticOptimum out;
  out.omega_drive = centre + best_sgn * std::exp(best_u);
  out.power = std::exp(best_v);
  out.sigma = best_sigma;
  out.ef = run_adiabatic(p, PulseSpec::gaussian(out.omega_drive, out.power, out.sigma), tau).ef;
  return out;
}

}  // namespace tripent
