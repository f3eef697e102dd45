#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "tripent/dynamics.hpp"

namespace tripent {

struct PulseSpec {
  enum class Shape { TopHat, Gaussian };
  Shape shape = Shape::TopHat;
  double omega_drive = 0;  // ω_D, rad/µs
  double power = 0;        // Ω₀, rad/µs
  double duration = 0;     // TopHat length, µs
  double sigma = 0;        // Gaussian width, µs; support [−3σ, 3σ]
  std::string target;

  // 2π-pulse on a spin-1 transition: duration 2π/(√2Ω₀).
  static PulseSpec top_hat_2pi(double omega_drive, double power, std::string target = "");
  static PulseSpec gaussian(double omega_drive, double power, double sigma, std::string target = "");
  double envelope(double t) const;  // t measured from the pulse centre (Gaussian) or start (TopHat)
  double length() const;
};

struct ProtocolEvent {
  double time;
  std::string action;
};

struct ProtocolReport {
  Mat final_nuclear_state;  // 4×4
  double ef = 0;
  double fidelity_to_target = 0;
  std::vector<ProtocolEvent> event_log;
  std::map<std::string, double> diagnostics;
};

// Computational nuclear basis state and the equal superposition of all four.
Vec nuclear_basis(int nuc);
Vec nuclear_plus_plus();

// Excited population below which the excitation counts as drained.
inline constexpr double kDrainedPopulation = 1e-4;

// |T₀⟩⊗ψ → T₊ for switch_time → T₀ → decay. Without decay the excitation is removed by ideal de-excitation.
ProtocolReport run_symmetric_polarized(const SystemParams& p, const Vec& nuclear0, double switch_time,
                                       bool decay = true);
// Two-stage protocol on the triplet mixture Σ p_j|T_j⟩⟨T_j| ⊗ |ψ⟩⟨ψ| with per-sublevel lifetimes.
ProtocolReport run_symmetric_mixed(const SystemParams& p, const Vec& nuclear0);

// Rotating-frame H_µw: ground ⊕ (H_eff + Ω₀S_x,e − ω_D S_z,e); 16×16.
Mat microwave_hamiltonian(const SystemParams& p, double omega_drive, double power);
// Resonance of T_upper ↔ T₀ for nuclear state nuc on the effective spectrum (upper = Plus or Minus).
double microwave_resonance(const SystemParams& p, Sublevel upper, int nuc);
// T₀-block of the decay-free pulse propagator, 4×4.
Mat cphase_2pi_t0_map(const SystemParams& p, double omega_drive, double power);
// Top-hat 2π-pulse from |T₀⟩⊗ψ with decay, then ideal de-excitation.
ProtocolReport cphase_2pi(const SystemParams& p, double omega_drive, double power, double tau,
                          const Vec& nuclear0 = nuclear_plus_plus());

struct TwoPiOptimum {
  double power = 0;   // Ω₀*
  double ef = 0;      // EF*
  double t_star = 0;  // 2π/(√2Ω₀*)
  std::vector<std::pair<double, double>> grid;  // (Ω₀, EF) of the coarse scan
};
// Drive resonant with T₊↑↑ ↔ T₀↑↑; log grid over [1e-3, 1e2] MHz then golden section.
TwoPiOptimum optimize_2pi_power(const SystemParams& p, double tau, int points_per_decade = 20);

// Maximum Rabi transfer Ω²/(Ω² + Δ²).
double rabi_leakage(double rabi, double detuning);

struct SelectivePulse {
  double rabi = 0;      // Ω, rad/µs
  double duration = 0;  // µs
};
// Strongest drive keeping every neighbor's leakage ≤ bound; duration = flip_angle / Ω.
SelectivePulse plan_selective_pulse(double target, const std::vector<double>& neighbors, double bound,
                                    double flip_angle);

// rf π/2 on n (T₀), µw shelf T₀→T₊ of the ↑ component, rf π on n′ (T₀), µw unshelf; top-hat pulses.
// `snapshots`, when given, receives the 12-dim excited amplitudes after each pulse (populations are frame-free).
ProtocolReport run_shelving(const SystemParams& p, const Vec& nuclear0 = nuclear_basis(DD), double bound = 0.01,
                            std::vector<Vec>* snapshots = nullptr);

// Adiabatic scheme: per nuclear state i, detunings Δ_{i,1} (T₀↔T₋) and Δ_{i,2} (T₊↔T₀) from ω_D.
std::array<double, 4> adiabatic_detunings_low(const SystemParams& p, double omega_drive);
std::array<double, 4> adiabatic_detunings_high(const SystemParams& p, double omega_drive);
// Shift of the T₀-like eigenvalue integrated over [−3σ, 3σ]:
// θ_i = sgn(Δ_{i,1})·½∫(√(Δ_{i,1}² + 2Ω(t)²) − |Δ_{i,1}|) dt. Throws PerturbationCondViolated.
std::array<double, 4> adiabatic_phases(const SystemParams& p, double omega_drive, double power, double sigma,
                                       double adiabatic_factor = 0.1);
// σ making θ₁ − θ₂ − θ₃ + θ₄ = ±π; θ_i is linear in σ, so σ = π/|Σ±θ_i(σ=1)|.
double solve_sigma(const SystemParams& p, double omega_drive, double power);
// True when Ω₀/√2 < f·min|Δ_{i,2}| and Ω₀/Δ_{i,1}² < f·σ for all i.
bool adiabatic_constraints_ok(const SystemParams& p, double omega_drive, double power, double sigma,
                              double factor = 0.1);

struct AdiabaticOptimum {
  double omega_drive = 0, power = 0, sigma = 0, ef = 0;
};
AdiabaticOptimum optimize_adiabatic(const SystemParams& p, double tau, double factor = 0.1);

// Per-state 3×3 H_i,app in {T₋i, T₀i, T₊i}, energies relative to T₀i; T₀–T₊ coupling dropped.
// In the frame rotating at ω_D, T₊i sits at −Δ_{i,2}.
Mat adiabatic_state_hamiltonian(double delta1, double delta2, double rabi);
// 16×16 H_app(t) in the frame where each |T₀ i⟩ sits at zero energy; t from the pulse centre.
Mat adiabatic_hamiltonian(const SystemParams& p, const PulseSpec& pulse, double t);
ProtocolReport run_adiabatic(const SystemParams& p, const PulseSpec& pulse, double tau,
                             const Vec& nuclear0 = nuclear_plus_plus());

// Ideal de-excitation: ground block plus Σ_j of the T_j blocks (4×4, not renormalized).
Mat deexcite(const Mat& rho16);

// θ₁ − θ₂ − θ₃ + θ₄ wrapped to (−π, π].
double conditional_phase(const std::array<double, 4>& theta);

}  // namespace tripent
