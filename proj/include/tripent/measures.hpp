#pragma once

#include <cstdint>

#include "tripent/algebra.hpp"

namespace tripent {

struct EntanglingPowerEstimate {
  double mean = 0;
  double std_error = 0;
  long samples = 0;
  std::uint64_t seed = 0;
};

// 1 − Tr ρ_A², ρ_A the reduced state of the first qubit.
double linear_entropy(const Mat& rho4);
// Same quantity for a pure two-qubit state: 2|ψ₀₀ψ₁₁ − ψ₀₁ψ₁₀|².
double linear_entropy_pure(const Vec& psi4);

// Mean linear entropy of U|a⟩⊗|b⟩ over Haar-random single-qubit states.
// Samples are drawn in fixed-size blocks with seeds derived from `seed`, so the
// estimate does not depend on `jobs`.
EntanglingPowerEstimate entangling_power_mc(const Mat& u, long samples, std::uint64_t seed, int jobs = 1);

double entangling_power_symmetric(double a, double t);
double entangling_power_lemma(double b, double beta);
double crossover_entangling_power(double a, double chi, double t);
double max_entangling_power(double chi);

double binary_entropy(double x);
double concurrence(const Mat& rho4);
double entanglement_of_formation(const Mat& rho4);
double ef_from_concurrence(double c);
double purity(const Mat& rho);
// Uhlmann fidelity (Tr√(√ρ σ √ρ))².
double fidelity(const Mat& rho, const Mat& sigma);
double fidelity(const Mat& rho, const Vec& psi);

// Hermitian square root of a positive semidefinite matrix; tiny negative eigenvalues are clipped.
Mat psd_sqrt(const Mat& m);

}  // namespace tripent
