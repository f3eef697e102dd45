#include "tripent/effective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tripent {

namespace {

double sgn(double x) { return x < 0 ? -1.0 : 1.0; }

void require_perturbative(const SystemParams& p) {
  p.validate();
  if (!p.perturbative_ok())
    throw PerturbationInvalid("|omega_n|, |omega_n'|, |D|, A, A' must all be < 0.05 omega_e");
}

// f_j from absolute differences, so ω_n = 0 or A = 0 stays well defined.
std::array<double, 3> asymmetry_strengths(const SystemParams& p) {
  const double dz = p.omega_n_prime - p.omega_n;  // Δ1·ω_n
  const double dh = p.A_prime - p.A;              // Δ2·A
  return {0.5 * (dh - dz), -0.5 * dz, 0.5 * (dh + dz)};
}

}  // namespace

double Couplings::operator[](Sublevel j) const {
  switch (j) {
    case Sublevel::Minus: return a_minus;
    case Sublevel::Zero: return a_zero;
    case Sublevel::Plus: return a_plus;
  }
  return 0;
}

Couplings couplings(double A, double omega_n, double omega_e, double D) {
  Couplings c;
  c.a_plus = 0.5 * A * A / (-D + omega_e + omega_n);
  c.a_minus = 0.5 * A * A / (D + omega_e + omega_n);
  c.a_zero = c.a_plus - c.a_minus;
  return c;
}

Couplings couplings(const SystemParams& p) { return couplings(p.A, p.omega_n, p.omega_e, p.D); }

Couplings couplings_prime(const SystemParams& p) {
  return couplings(p.A_prime, p.omega_n_prime, p.omega_e, p.D);
}

double phi(const Couplings& c, double A, double omega_n, Sublevel j) {
  switch (j) {
    case Sublevel::Minus: return -omega_n + A - c.a_minus;
    case Sublevel::Zero: return -omega_n - c.a_minus - c.a_plus;
    case Sublevel::Plus: return -omega_n - A - c.a_plus;
  }
  return 0;
}

SymmetricSpectrum symmetric_spectrum(const SystemParams& p) {
  require_perturbative(p);
  for (Regime r : classify_regime(p))
    if (r != Regime::Symmetric) throw WrongRegime("symmetric_spectrum requires omega_n = omega_n' and A = A'");

  const Couplings c = couplings(p);
  SymmetricSpectrum s;
  s.a_plus = c.a_plus;
  s.a_minus = c.a_minus;
  s.a_zero = c.a_zero;
  s.a = {c.a_minus, c.a_zero, c.a_plus};
  s.eps = {p.omega_n - p.A + 2 * c.a_minus, p.omega_n + 2 * c.a_plus, p.omega_n + p.A};
  s.delta = {-2 * c.a_minus, -2 * c.a_zero, 2 * c.a_plus};
  s.eigvecs = Mat::Zero(kExcitedDim, kExcitedDim);
  const double r = 1.0 / std::sqrt(2.0);
  for (Sublevel j : kSublevels) {
    const int k = index(j);
    s.phi[k] = phi(c, p.A, p.omega_n, j);
    const double e2 = -value(j) * p.omega_e + std::abs(value(j)) * p.D;
    const double e3 = e2 - s.delta[k];
    s.E[k] = {e3 - s.eps[k], e2, e3, e2 + s.eps[k]};
    const int base = 4 * k;
    s.eigvecs(base + DD, base + 0) = 1;
    s.eigvecs(base + DU, base + 1) = -r;
    s.eigvecs(base + UD, base + 1) = r;
    s.eigvecs(base + DU, base + 2) = r;
    s.eigvecs(base + UD, base + 2) = r;
    s.eigvecs(base + UU, base + 3) = 1;
  }
  return s;
}

Mat symmetric_block_xy(const SymmetricSpectrum& s, Sublevel j) {
  const SpinOperators& o = spin_operators();
  return k_sign(j) * 2.0 * s.a[index(j)] * (o.Sx_n * o.Sx_np + o.Sy_n * o.Sy_np);
}

Mat symmetric_block(const SymmetricSpectrum& s, Sublevel j) {
  const int k = index(j);
  const Mat v = s.eigvecs.block(4 * k, 4 * k, 4, 4);
  Vec e(4);
  for (int i = 0; i < 4; ++i) e(i) = s.E[k][i];
  return v * e.asDiagonal() * v.adjoint();
}

Mat asymmetric_block(const SystemParams& p, Sublevel j) {
  if (classify_regime(p)[index(j)] != Regime::Asymmetric)
    throw WrongRegime(std::string("sublevel ") + name(j) + " is not in the asymmetric regime");
  const SpinOperators& o = spin_operators();
  return phi(couplings_prime(p), p.A_prime, p.omega_n_prime, j) * o.Sz_np +
         phi(couplings(p), p.A, p.omega_n, j) * o.Sz_n;
}

CrossoverSpectrum crossover_spectrum(const SystemParams& p) {
  require_perturbative(p);
  const Couplings c = couplings(p);
  CrossoverSpectrum x;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  x.Delta1 = p.omega_n != 0 ? (p.omega_n_prime - p.omega_n) / p.omega_n : nan;
  x.Delta2 = p.A != 0 ? (p.A_prime - p.A) / p.A : nan;
  x.f = asymmetry_strengths(p);
  const std::array<double, 3> eps = {p.omega_n - p.A + 2 * c.a_minus, p.omega_n + 2 * c.a_plus,
                                     p.omega_n + p.A};
  for (Sublevel j : kSublevels) {
    const int k = index(j);
    const double a = c[j], f = x.f[k], kj = k_sign(j);
    x.a[k] = a;
    x.chi[k] = a != 0 ? std::abs(f / a) : (f == 0 ? 0.0 : std::numeric_limits<double>::infinity());
    const double r = std::hypot(a, f);
    // |α_{j,2,1}|² = ½(1 + sgn(a) f / r); f = a = 0 falls back to the symmetric combination.
    const double ratio = r > 0 ? sgn(a) * f / r : 0.0;
    const double c1 = std::sqrt(0.5 * (1 + ratio)), c2 = std::sqrt(0.5 * (1 - ratio));
    x.alpha[k][0] = {c1, -c2};
    x.alpha[k][1] = {c2, c1};
    const double e2 = -value(j) * p.omega_e + std::abs(value(j)) * p.D;
    const double delta = -2 * kj * a;  // δ_j
    x.centre[k] = e2;
    x.relative[k] = {-delta - eps[k] + kj * f, kj * (a - sgn(a) * r), kj * (a + sgn(a) * r), eps[k] - kj * f};
    for (int i = 0; i < 4; ++i) x.Etilde[k][i] = e2 + x.relative[k][i];
  }
  return x;
}

Mat crossover_block(const CrossoverSpectrum& c, Sublevel j) {
  const int k = index(j);
  Mat v = Mat::Zero(4, 4);
  v(DD, 0) = 1;
  v(DU, 1) = c.alpha[k][0][0];
  v(UD, 1) = c.alpha[k][0][1];
  v(DU, 2) = c.alpha[k][1][0];
  v(UD, 2) = c.alpha[k][1][1];
  v(UU, 3) = 1;
  Vec e(4);
  for (int i = 0; i < 4; ++i) e(i) = c.relative[k][i];
  Mat h = v * e.asDiagonal() * v.adjoint();
  h.diagonal().array() += c.centre[k];
  return h;
}

std::array<Regime, 3> classify_regime(const SystemParams& p) {
  const CrossoverSpectrum c = crossover_spectrum(p);
  std::array<Regime, 3> out{};
  for (Sublevel j : kSublevels) {
    const int k = index(j);
    const double a2 = c.alpha_sq(j);
    if (c.f[k] == 0)
      out[k] = Regime::Symmetric;
    else if (a2 <= 0.001 || a2 >= 0.999)
      out[k] = Regime::Asymmetric;
    else
      out[k] = Regime::Crossover;
  }
  return out;
}

std::array<std::array<double, 4>, 3> exact_labeled_energies(const SystemParams& p) {
  const Eigh e = eigh(excited_block(p));
  // Greedy assignment by descending overlap keeps the labeling a bijection.
  struct Cand { double w; int vec, state; };
  std::vector<Cand> cands;
  for (int v = 0; v < kExcitedDim; ++v)
    for (int s = 0; s < kExcitedDim; ++s) cands.push_back({std::norm(e.vectors(s, v)), v, s});
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.w > b.w; });
  std::array<bool, kExcitedDim> used_v{}, used_s{};
  std::array<std::array<double, 4>, 3> out{};
  for (const Cand& c : cands) {
    if (used_v[c.vec] || used_s[c.state]) continue;
    used_v[c.vec] = used_s[c.state] = true;
    out[c.state / 4][c.state % 4] = e.values(c.vec);
  }
  return out;
}

TransitionSpectrum transition_spectrum(const SystemParams& p, bool require_asymmetric) {
  require_perturbative(p);
  if (require_asymmetric)
    for (Regime r : classify_regime(p))
      if (r != Regime::Asymmetric) throw WrongRegime("transition_spectrum requires the asymmetric regime");
  const Couplings c = couplings(p), cp = couplings_prime(p);
  TransitionSpectrum t;
  for (Sublevel j : kSublevels) {
    const int k = index(j);
    const double minus = (j == Sublevel::Minus || j == Sublevel::Zero) ? 1 : 0;
    const double plus = (j == Sublevel::Zero || j == Sublevel::Plus) ? 1 : 0;
    t.rf[k] = std::abs(-value(j) * p.A - p.omega_n - c.a_minus * minus - c.a_plus * plus);
    t.rf_prime[k] =
        std::abs(-value(j) * p.A_prime - p.omega_n_prime - cp.a_minus * minus - cp.a_plus * plus);
  }
  const double hs = 0.5 * (p.A + p.A_prime), hd = 0.5 * (p.A - p.A_prime);
  // (−1)^j D: j = + for the T₊↔T₀ pair, j = 0 for T₀↔T₋.
  const std::array<double, 2> centre = {p.omega_e - p.D, p.omega_e + p.D};
  for (int pair = 0; pair < 2; ++pair)
    t.mw[pair] = {centre[pair] + hs, centre[pair] + hd, centre[pair] - hd, centre[pair] - hs};
  return t;
}

ExactTransitions exact_transitions(const SystemParams& p) {
  const auto E = exact_labeled_energies(p);
  ExactTransitions t;
  for (int k = 0; k < 3; ++k) {
    // Nucleus n flips between nuc and nuc ^ 2; partner n′ flips between nuc and nuc ^ 1.
    t.rf[k] = {std::abs(E[k][UD] - E[k][DD]), std::abs(E[k][UU] - E[k][DU])};
    t.rf_prime[k] = {std::abs(E[k][DU] - E[k][DD]), std::abs(E[k][UU] - E[k][UD])};
  }
  const int m = index(Sublevel::Minus), z = index(Sublevel::Zero), pl = index(Sublevel::Plus);
  for (int nuc = 0; nuc < 4; ++nuc) {
    t.mw[0][nuc] = std::abs(E[z][nuc] - E[pl][nuc]);
    t.mw[1][nuc] = std::abs(E[m][nuc] - E[z][nuc]);
  }
  return t;
}

Mat effective_excited_block(const SystemParams& p) {
  const auto regimes = classify_regime(p);
  const CrossoverSpectrum c = crossover_spectrum(p);
  std::array<std::array<double, 4>, 3> exact{};
  bool have_exact = false;
  Mat h = Mat::Zero(kExcitedDim, kExcitedDim);
  for (Sublevel j : kSublevels) {
    const int k = index(j);
    if (regimes[k] == Regime::Asymmetric) {
      // Diagonal H_asym,eff with the additive constant fixed by the exact spectrum.
      if (!have_exact) {
        exact = exact_labeled_energies(p);
        have_exact = true;
      }
      for (int nuc = 0; nuc < 4; ++nuc) h(4 * k + nuc, 4 * k + nuc) = exact[k][nuc];
    } else {
      h.block(4 * k, 4 * k, 4, 4) = crossover_block(c, j);
    }
  }
  return h;
}

std::vector<double> mixing_corrections(const SystemParams& p) {
  const double r = 1.0 / std::sqrt(2.0);
  std::vector<double> out;
  for (auto [A, wn] : {std::pair{p.A, p.omega_n}, std::pair{p.A_prime, p.omega_n_prime}})
    for (double s : {1.0, -1.0}) out.push_back(std::abs(r * A / (p.D + s * (p.omega_e + wn))));
  return out;
}

}  // namespace tripent
