#include "tripent/model.hpp"

#include <cmath>
#include <sstream>

namespace tripent {

const char* name(Sublevel j) {
  switch (j) {
    case Sublevel::Minus: return "minus";
    case Sublevel::Zero: return "zero";
    case Sublevel::Plus: return "plus";
  }
  return "?";
}

const char* name(Regime r) {
  switch (r) {
    case Regime::Symmetric: return "Symmetric";
    case Regime::Crossover: return "Crossover";
    case Regime::Asymmetric: return "Asymmetric";
  }
  return "?";
}

bool SystemParams::perturbative_ok() const {
  const double bound = 0.05 * omega_e;
  return omega_e > 0 && std::abs(omega_n) < bound && std::abs(omega_n_prime) < bound &&
         std::abs(D) < bound && std::abs(A) < bound && std::abs(A_prime) < bound;
}

void SystemParams::validate() const {
  std::ostringstream msg;
  if (!(omega_e > 0)) msg << "omega_e must be > 0 (got " << omega_e << "); ";
  if (!(tau_minus > 0 && tau_zero > 0 && tau_plus > 0)) msg << "lifetimes must be > 0; ";
  if (p_minus < 0 || p_zero < 0 || p_plus < 0) msg << "populations must be non-negative; ";
  if (std::abs(p_minus + p_zero + p_plus - 1.0) > 1e-9) msg << "populations must sum to 1; ";
  const std::string s = msg.str();
  if (!s.empty()) throw InvalidParams(s.substr(0, s.size() - 2));
}

double SystemParams::tau(Sublevel j) const {
  switch (j) {
    case Sublevel::Minus: return tau_minus;
    case Sublevel::Zero: return tau_zero;
    case Sublevel::Plus: return tau_plus;
  }
  return tau_zero;
}

double SystemParams::population(Sublevel j) const {
  switch (j) {
    case Sublevel::Minus: return p_minus;
    case Sublevel::Zero: return p_zero;
    case Sublevel::Plus: return p_plus;
  }
  return p_zero;
}

SystemParams from_mhz(SystemParams p) {
  for (double* f : {&p.omega_n, &p.omega_n_prime, &p.omega_e, &p.A, &p.A_prime, &p.D, &p.omega_0}) *f *= kTwoPi;
  return p;
}

SystemParams to_mhz(SystemParams p) {
  for (double* f : {&p.omega_n, &p.omega_n_prime, &p.omega_e, &p.A, &p.A_prime, &p.D, &p.omega_0}) *f /= kTwoPi;
  return p;
}

SystemParams demf_params() {
  SystemParams p;
  p.omega_n = p.omega_n_prime = 3.7;
  p.A = p.A_prime = 2.5;
  p.D = -296.0;
  p.omega_e = 9600.0;
  p.tau_minus = p.tau_plus = 570.0;
  p.tau_zero = 20.0;
  p.p_minus = p.p_plus = 0.49;
  p.p_zero = 0.02;
  return from_mhz(p);
}

SystemParams dmfph_params() {
  SystemParams p;
  p.omega_n = 5.97;
  p.omega_n_prime = 14.74;
  p.A = 6.0;
  p.A_prime = 11.0;
  p.D = -320.0;
  p.omega_e = 9700.0;
  p.tau_minus = p.tau_zero = p.tau_plus = 10.0;
  p.p_minus = p.p_plus = 0.0;
  p.p_zero = 1.0;
  return from_mhz(p);
}

namespace {

SpinOperators make_spin_operators() {
  const Mat id2 = Mat::Identity(2, 2);
  Mat sx(2, 2), sy(2, 2), sz(2, 2);
  // Basis (↓, ↑) with S_z|↓⟩ = +½|↓⟩.
  sx << 0, 0.5, 0.5, 0;
  sy << 0, -0.5 * I, 0.5 * I, 0;
  sz << 0.5, 0, 0, -0.5;

  const double r = 1.0 / std::sqrt(2.0);
  Mat ex(3, 3), ey(3, 3), ez(3, 3);
  ex << 0, r, 0, r, 0, r, 0, r, 0;
  ey << 0, -I * r, 0, I * r, 0, -I * r, 0, I * r, 0;
  ez << 1, 0, 0, 0, 0, 0, 0, 0, -1;

  SpinOperators s;
  s.Sx_n = kron(sx, id2);
  s.Sy_n = kron(sy, id2);
  s.Sz_n = kron(sz, id2);
  s.Sx_np = kron(id2, sx);
  s.Sy_np = kron(id2, sy);
  s.Sz_np = kron(id2, sz);
  s.Sx_e = ex;
  s.Sy_e = ey;
  s.Sz_e = ez;
  return s;
}

}  // namespace

const SpinOperators& spin_operators() {
  static const SpinOperators ops = make_spin_operators();
  return ops;
}

Mat ground_block(const SystemParams& p) {
  const SpinOperators& s = spin_operators();
  return -p.omega_n * s.Sz_n - p.omega_n_prime * s.Sz_np;
}

Mat excited_block(const SystemParams& p) {
  const SpinOperators& s = spin_operators();
  const Mat id3 = Mat::Identity(3, 3), id4 = Mat::Identity(4, 4);
  Mat h = kron(id3, ground_block(p));
  h += p.omega_e * kron(s.Sz_e, id4) + p.D * kron(s.Sz_e * s.Sz_e, id4);
  h += p.A * (kron(s.Sx_e, s.Sx_n) + kron(s.Sy_e, s.Sy_n) + kron(s.Sz_e, s.Sz_n));
  h += p.A_prime * (kron(s.Sx_e, s.Sx_np) + kron(s.Sy_e, s.Sy_np) + kron(s.Sz_e, s.Sz_np));
  return h;
}

Mat build_full_hamiltonian(const SystemParams& p) {
  Mat h = Mat::Zero(kDim, kDim);
  h.topLeftCorner(4, 4) = ground_block(p);
  h.bottomRightCorner(kExcitedDim, kExcitedDim) =
      excited_block(p) + p.omega_0 * Mat::Identity(kExcitedDim, kExcitedDim);
  return h;
}

}  // namespace tripent
