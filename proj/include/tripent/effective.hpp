#pragma once

#include <array>
#include <vector>

#include "tripent/model.hpp"

namespace tripent {

// Second-order couplings a_j for one nucleus (A, ω_n) or its partner (A′, ω_n′).
struct Couplings {
  double a_plus = 0, a_minus = 0, a_zero = 0;
  double operator[](Sublevel j) const;
};
Couplings couplings(double A, double omega_n, double omega_e, double D);
Couplings couplings(const SystemParams& p);        // unprimed
Couplings couplings_prime(const SystemParams& p);  // primed

struct SymmetricSpectrum {
  double a_plus = 0, a_minus = 0, a_zero = 0;
  // Indexed by index(j).
  std::array<double, 3> a{}, eps{}, delta{}, phi{};
  std::array<std::array<double, 4>, 3> E{};  // E[j][i-1]
  Mat eigvecs;  // 12×12, column 4·index(j) + (i−1) is |E_{j,i}⟩ in the excited basis
};

SymmetricSpectrum symmetric_spectrum(const SystemParams& p);
// Effective T_j block k(j)·2a_j(S_x S_x′ + S_y S_y′) in the rotating frame.
Mat symmetric_block_xy(const SymmetricSpectrum& s, Sublevel j);
// Lab-frame effective T_j block V diag(E) V† (absolute energies).
Mat symmetric_block(const SymmetricSpectrum& s, Sublevel j);

// φ′_j S_z,n′ + φ_j S_z,n.
Mat asymmetric_block(const SystemParams& p, Sublevel j);
double phi(const Couplings& c, double A, double omega_n, Sublevel j);

struct CrossoverSpectrum {
  double Delta1 = 0, Delta2 = 0;  // NaN when the reference ω_n or A is zero
  std::array<double, 3> a{}, f{}, chi{};
  // alpha[j][0] = (α_{j,2,1}, α_{j,2,2}), alpha[j][1] = (α_{j,3,1}, α_{j,3,2}); unit-norm amplitudes.
  std::array<std::array<std::array<double, 2>, 2>, 3> alpha{};
  std::array<std::array<double, 4>, 3> Etilde{};
  // Etilde = centre + relative; relative keeps full precision next to the large Zeeman/ZFS offset.
  std::array<double, 3> centre{};
  std::array<std::array<double, 4>, 3> relative{};
  double alpha_sq(Sublevel j) const { auto x = alpha[index(j)][0][0]; return x * x; }
};

CrossoverSpectrum crossover_spectrum(const SystemParams& p);
// Lab-frame effective T_j block with eigenpairs (Ẽ_{j,i}, |Ẽ_{j,i}⟩).
Mat crossover_block(const CrossoverSpectrum& c, Sublevel j);

// 12×12 block-diagonal effective excited Hamiltonian, per-sublevel form chosen by classify_regime.
Mat effective_excited_block(const SystemParams& p);

struct TransitionSpectrum {
  std::array<double, 3> rf{}, rf_prime{};
  // mw[0]: T₊↔T₀, mw[1]: T₀↔T₋; inner index is the nuclear state (DD, DU, UD, UU).
  std::array<std::array<double, 4>, 2> mw{};
};
TransitionSpectrum transition_spectrum(const SystemParams& p, bool require_asymmetric = true);

// Same table from exact eigenvalue differences; eigenstates labeled by dominant basis weight.
// rf entries are reported per partner state: rf_exact[j][partner] etc.
struct ExactTransitions {
  std::array<std::array<double, 2>, 3> rf{}, rf_prime{};
  std::array<std::array<double, 4>, 2> mw{};
};
ExactTransitions exact_transitions(const SystemParams& p);
// Exact excited eigenvalue for the state dominated by |T_j nuc⟩.
std::array<std::array<double, 4>, 3> exact_labeled_energies(const SystemParams& p);

std::vector<double> mixing_corrections(const SystemParams& p);

}  // namespace tripent
