#include "tripent/measures.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

namespace tripent {

namespace {

void require_two_qubit_state(const Mat& rho4) {
  if (rho4.rows() != 4 || rho4.cols() != 4) throw InvalidState("expected a 4x4 two-qubit density matrix");
  if (!is_density_matrix(rho4, 1e-8, 1e-8)) throw InvalidState("not a valid two-qubit density matrix");
}

constexpr long kBlock = 4096;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct BlockSum {
  double sum = 0, sumsq = 0;
};

BlockSum run_block(const Mat& u, long n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  auto haar = [&]() {
    Eigen::Vector2cd v(cplx(g(rng), g(rng)), cplx(g(rng), g(rng)));
    return Eigen::Vector2cd(v.normalized());
  };
  const Eigen::Matrix4cd uf = u;
  BlockSum s;
  for (long k = 0; k < n; ++k) {
    const Eigen::Vector2cd a = haar(), b = haar();
    Eigen::Vector4cd prod(a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1));
    const double e = linear_entropy_pure(uf * prod);
    s.sum += e;
    s.sumsq += e * e;
  }
  return s;
}

}  // namespace

double linear_entropy(const Mat& rho4) {
  require_two_qubit_state(rho4);
  const Mat ra = partial_trace(rho4, {2, 2}, {0});
  return 1.0 - (ra * ra).trace().real();
}

double linear_entropy_pure(const Vec& psi4) {
  return 2.0 * std::norm(psi4(0) * psi4(3) - psi4(1) * psi4(2));
}

EntanglingPowerEstimate entangling_power_mc(const Mat& u, long samples, std::uint64_t seed, int jobs) {
  if (u.rows() != 4 || !is_unitary(u, 1e-10)) throw NotUnitary("entangling_power_mc expects a 4x4 unitary");
  if (samples < 2) throw DegenerateInput("entangling_power_mc needs at least two samples");
  const long nblocks = (samples + kBlock - 1) / kBlock;
  std::vector<BlockSum> sums(nblocks);
  auto work = [&](long first, long stride) {
    for (long b = first; b < nblocks; b += stride) {
      const long n = std::min(kBlock, samples - b * kBlock);
      sums[b] = run_block(u, n, splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(b))));
    }
  };
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(nblocks)));
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(work, j, jobs);
    for (auto& t : pool) t.join();
  }
  double sum = 0, sumsq = 0;
  for (const BlockSum& s : sums) {
    sum += s.sum;
    sumsq += s.sumsq;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1));
  return {mean, std::sqrt(var / n), samples, seed};
}

double entangling_power_symmetric(double a, double t) {
  const double s = std::sin(a * t);
  return (3.0 + std::cos(2 * a * t)) * s * s / 9.0;
}

double entangling_power_lemma(double b, double beta) {
  const double q = b * b - b * b * b * b;
  const double s2 = std::pow(std::sin(beta / 2), 2);
  return 16.0 / 9.0 * q * s2 - 32.0 / 9.0 * q * q * s2 * s2;
}

double crossover_entangling_power(double a, double chi, double t) {
  const double r = std::sqrt(1 + chi * chi);
  const double s = std::sin(a * t * r);
  return (3 + 4 * chi * chi + std::cos(2 * a * t * r)) * s * s / (9 * std::pow(1 + chi * chi, 2));
}

double max_entangling_power(double chi) {
  const double c2 = chi * chi;
  return 2.0 / 9.0 * (1 + 2 * c2) / std::pow(1 + c2, 2);
}

double binary_entropy(double x) {
  if (x <= 0 || x >= 1) return 0.0;
  return -x * std::log2(x) - (1 - x) * std::log2(1 - x);
}

Mat psd_sqrt(const Mat& m) {
  const Eigh e = eigh(hermitian_part(m), 1e-8);
  RVec s = e.values.cwiseMax(0.0).cwiseSqrt();
  return e.vectors * s.cast<cplx>().asDiagonal() * e.vectors.adjoint();
}

double concurrence(const Mat& rho4) {
  require_two_qubit_state(rho4);
  Mat y(2, 2);
  y << 0, -I, I, 0;
  const Mat yy = kron(y, y);
  // ρ = W W† over eigenvalues above roundoff; λ are the singular values of W† (σ_y⊗σ_y) W*.
  // Avoids square roots of roundoff-sized eigenvalues of ρρ̃ for (nearly) pure states.
  const Eigh e = eigh(hermitian_part(rho4), 1e-8);
  std::vector<int> keep;
  for (int k = 0; k < 4; ++k)
    if (e.values(k) > 1e-14) keep.push_back(k);
  Mat w(4, static_cast<Eigen::Index>(keep.size()));
  for (size_t k = 0; k < keep.size(); ++k) w.col(k) = std::sqrt(e.values(keep[k])) * e.vectors.col(keep[k]);
  std::vector<double> lam(4, 0.0);
  if (!keep.empty()) {
    const Mat tau = w.adjoint() * yy * w.conjugate();
    const RVec sv = Eigen::JacobiSVD<Mat>(tau).singularValues();
    for (Eigen::Index k = 0; k < sv.size(); ++k) lam[k] = sv(k);
  }
  std::sort(lam.begin(), lam.end(), std::greater<>());
  return std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]);
}

double ef_from_concurrence(double c) {
  c = std::clamp(c, 0.0, 1.0);
  return binary_entropy(0.5 * (1 + std::sqrt(1 - c * c)));
}

double entanglement_of_formation(const Mat& rho4) { return ef_from_concurrence(concurrence(rho4)); }

double purity(const Mat& rho) { return (rho * rho).trace().real(); }

double fidelity(const Mat& rho, const Mat& sigma) {
  const Mat r = psd_sqrt(rho);
  const Mat inner = psd_sqrt(r * sigma * r);
  const double f = inner.trace().real();
  return f * f;
}

double fidelity(const Mat& rho, const Vec& psi) { return (psi.adjoint() * rho * psi)(0, 0).real(); }

}  // namespace tripent
