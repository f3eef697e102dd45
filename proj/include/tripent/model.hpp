#pragma once

#include <array>
#include <string>

#include "tripent/algebra.hpp"

namespace tripent {

// Triplet sublevels in basis order; value() is the S_z,e eigenvalue label j.
enum class Sublevel { Minus = 0, Zero = 1, Plus = 2 };
inline constexpr std::array<Sublevel, 3> kSublevels{Sublevel::Minus, Sublevel::Zero, Sublevel::Plus};
inline int index(Sublevel j) { return static_cast<int>(j); }
inline int value(Sublevel j) { return static_cast<int>(j) - 1; }
// k(j) = (1, 1, −1) for j = (−, 0, +).
inline double k_sign(Sublevel j) { return j == Sublevel::Plus ? -1.0 : 1.0; }
const char* name(Sublevel j);

// Nuclear computational basis; the first arrow is nucleus n, the second n′.
enum Nuclear : int { DD = 0, DU = 1, UD = 2, UU = 3 };

// 16-dim layout: ground |0⟩⊗nuc at 0..3, then |e T_j⟩⊗nuc at 4 + 4·index(j) + nuc.
inline constexpr int kDim = 16;
inline constexpr int kExcitedDim = 12;
inline int ground_index(int nuc) { return nuc; }
inline int excited_index(Sublevel j, int nuc) { return 4 + 4 * index(j) + nuc; }

inline constexpr double kTwoPi = 6.283185307179586;

// Frequencies are angular, in rad/µs; a quoted value ν in MHz enters as 2πν.
struct SystemParams {
  double omega_n = 0, omega_n_prime = 0;
  double omega_e = 0;
  double A = 0, A_prime = 0;
  double D = 0;
  double omega_0 = 0;  // bookkeeping only
  double tau_minus = 1, tau_zero = 1, tau_plus = 1;  // µs
  double p_minus = 0, p_zero = 1, p_plus = 0;

  bool perturbative_ok() const;
  // Throws InvalidParams on ω_e ≤ 0, bad lifetimes or populations.
  void validate() const;
  double tau(Sublevel j) const;
  double population(Sublevel j) const;
};

// Scale every frequency field from MHz to rad/µs and back.
SystemParams from_mhz(SystemParams p);
SystemParams to_mhz(SystemParams p);

// Quoted parameter sets, converted to rad/µs.
SystemParams demf_params();
SystemParams dmfph_params();

struct SpinOperators {
  // Nuclear operators act on the 4-dim two-nucleus space.
  Mat Sx_n, Sy_n, Sz_n;
  Mat Sx_np, Sy_np, Sz_np;
  // Electron spin-1 in (T₋, T₀, T₊) order.
  Mat Sx_e, Sy_e, Sz_e;
};
const SpinOperators& spin_operators();

// ⟨e|H|e⟩ without the ω₀ shift, 12×12.
Mat excited_block(const SystemParams& p);
// Full 16×16 Hamiltonian including ω₀ on the excited block.
Mat build_full_hamiltonian(const SystemParams& p);
// Ground-block Hamiltonian −ω_n S_z,n − ω_n′ S_z,n′.
Mat ground_block(const SystemParams& p);

enum class Regime { Symmetric, Crossover, Asymmetric };
const char* name(Regime r);
std::array<Regime, 3> classify_regime(const SystemParams& p);

}  // namespace tripent
