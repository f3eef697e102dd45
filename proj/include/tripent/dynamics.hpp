#pragma once

#include <array>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "tripent/effective.hpp"

namespace tripent {

struct DecayChannel {
  // E′ − E measured from the optical energy ω₀; the physical Bohr frequency is ω₀ + frequency > 0.
  double frequency = 0;
  Mat op;           // 16×16 A(ω), excited → ground
  double rate = 0;  // Γ(ω) = 1/(2τ)
  int source = -1;  // index of the radiating sublevel
};

enum class Picture { Schroedinger, Interaction };

// Precomputed pieces of one ordered (ω, ω′) term: Γ(ω)(A ρ B† − B†A ρ) + h.c.
struct DissipatorTerm {
  Mat a, b_dag, b_dag_a;
  double rate = 0;
  double dw = 0;  // ω′ − ω
  int source = -1;  // channel index of a
};

struct MasterEqSpec {
  Mat hamiltonian;  // 16×16; generates the coherent term and the interaction picture
  std::vector<DecayChannel> channels;
  std::vector<std::pair<int, int>> exempt_pairs;  // i < k
  Picture picture = Picture::Schroedinger;
  // Optional time-dependent coherent part (Schrödinger picture only); overrides `hamiltonian`.
  std::function<Mat(double)> hamiltonian_at;
  // Filled by prepare(): diagonal terms collapse into jumps plus one anticommutator operator.
  std::vector<Mat> jumps;  // √(2Γ)·A
  Mat jump_norm;           // Σ Γ A†A
  std::vector<DissipatorTerm> cross;
  std::vector<std::vector<int>> cross_of;  // indices into `cross`, grouped by source channel
  // Set when every channel maps excited → ground in the 16-dim layout; enables 4×12 block arithmetic.
  bool block_form = false;
  std::vector<Mat> low;        // 4×12 excited → ground block of each channel
  std::vector<Mat> cross_low;  // 12×4 block of b_dag per cross term
  std::vector<Mat> cross_ee;   // 12×12 block of b_dag_a per cross term
  Mat jump_norm_ee;
  bool prepared = false;
};

void prepare(MasterEqSpec& spec);

Mat dipole_operator();
// 16×16 ground ⊕ effective excited Hamiltonian (ω₀ excluded).
Mat effective_hamiltonian(const SystemParams& p);
// 16×16 ground ⊕ exact excited block (ω₀ excluded).
Mat exact_hamiltonian(const SystemParams& p);

// One channel per (radiating sublevel, Bohr frequency); eigenvalues clustered at cluster_tol·‖h‖₂.
std::vector<DecayChannel> decay_channels(const Mat& h, double tau, double cluster_tol = 1e-9);
// Per-sublevel lifetimes: channels radiated by T_j decay at 1/(2τ_j).
std::vector<DecayChannel> decay_channels(const Mat& h, const std::array<double, 3>& taus,
                                         double cluster_tol = 1e-9);

// Every pair within one cluster of a relation, so that the kept cross terms form all-ones blocks and the
// generator stays completely positive.
std::vector<std::pair<int, int>> close_exempt_pairs(int n, const std::vector<std::pair<int, int>>& pairs);
// Same-sublevel pairs with |ω − ω′| < factor/τ (τ from the faster channel), closed into clusters.
std::vector<std::pair<int, int>> rwa_exempt_pairs(const std::vector<DecayChannel>& ch, double factor = 30.0);
// Same rule restricted to pairs whose channels both originate in `source`.
std::vector<std::pair<int, int>> rwa_exempt_pairs(const std::vector<DecayChannel>& ch, int source,
                                                  double factor = 30.0);

// The coherent pair S = {ω₁, ω₂}: T₀-sourced channels landing in span{↓↑, ↑↓} of the ground block.
std::vector<std::pair<int, int>> t0_coherent_pairs(const std::vector<DecayChannel>& ch);

MasterEqSpec make_master_spec(const Mat& h, std::vector<DecayChannel> channels, Picture picture,
                              std::optional<std::vector<std::pair<int, int>>> exempt = std::nullopt);

// Σ Γ(2AρA† − {A†A, ρ}) plus −i[H, ρ] in the Schrödinger picture.
Mat secular_rhs(const Mat& rho, const MasterEqSpec& spec, double t = 0.0);
// Secular terms plus exempt cross terms; phases e^{i(ω′−ω)t} appear only in the interaction picture.
Mat partial_rwa_rhs(double t, const Mat& rho, const MasterEqSpec& spec);

struct TrajectorySample {
  double t;
  Mat rho;
};

struct IntegrateOptions {
  double tol = 1e-8;
  double t0 = 0.0;
  double h_init = 0.0;   // 0 picks a step from the rates
  double h_min = 1e-14;  // relative to the span
  std::vector<double> sample_times;  // absolute times within [t0, t_end]
  long max_steps = 10'000'000;
};

struct IntegrateResult {
  Mat rho;
  std::vector<TrajectorySample> samples;
  long accepted = 0, rejected = 0;
};

// Dormand–Prince 5(4) on partial_rwa_rhs; ρ is re-symmetrized after every accepted step.
IntegrateResult integrate_master(const Mat& rho0, const MasterEqSpec& spec, double t_end,
                                 const IntegrateOptions& opt = {});

// Interaction ↔ Schrödinger picture conversion for a time-independent H.
Mat to_schroedinger(const Mat& rho_tilde, const Mat& h, double t);
Mat to_interaction(const Mat& rho, const Mat& h, double t);

// Ideal post-decay nuclear state for δ₀τ → 0; accepts 12×12 or 16×16 input.
Mat final_nuclear_state_closed_form(const Mat& rho0);

// ⟨0|ρ|0⟩ and the excited-block population.
Mat ground_state_block(const Mat& rho16);
double excited_population(const Mat& rho16);
// Ground-block nuclear state renormalized to unit trace.
Mat nuclear_state(const Mat& rho16);

// exp(−iS_z,n φ t)·exp(−iS_z,n′ φ′ t) applied to a 4-dim vector (U ψ) or operator (U X U†).
Mat rotating_frame(const Mat& state_or_op, double phi, double phi_prime, double t);
// H′ = U H U† + i U dU†/dt for an H commuting with both S_z.
Mat rotating_frame_hamiltonian(const Mat& h4, double phi, double phi_prime);

// Σ_i w_i (1/τ_i)/((ω − ω_i)² + 1/τ_i²) with 1/τ_i = 2Γ_i.
std::vector<double> emission_spectrum(const std::vector<DecayChannel>& ch, const std::vector<double>& grid,
                                      const std::vector<double>& weights = {});
// Population flowing through each channel from ρ₀: Tr(A ρ₀ A†)·2Γ·τ_i = Tr(A ρ₀ A†).
std::vector<double> channel_weights(const std::vector<DecayChannel>& ch, const Mat& rho0);

}  // namespace tripent
