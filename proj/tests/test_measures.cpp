#include <doctest.h>

#include <random>

#include "tripent/effective.hpp"
#include "tripent/measures.hpp"

using namespace tripent;

namespace {

Vec bell() { return (Vec::Unit(4, 0) + Vec::Unit(4, 3)) / std::sqrt(2.0); }

Mat cnot() {
  Mat m = Mat::Zero(4, 4);
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
  return m;
}

Vec random_state(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = cplx(g(rng), g(rng));
  return v.normalized();
}

Mat random_unitary(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = cplx(g(rng), g(rng));
  Eigen::HouseholderQR<Mat> qr(m);
  return qr.householderQ() * Mat::Identity(d, d);
}

// Lemma-1 unitary: eigenvectors |↓↓⟩, −a|↓↑⟩+b|↑↓⟩, b|↓↑⟩+a|↑↓⟩, |↑↑⟩ with E₁−E₂−E₃+E₄ = 0.
Mat lemma_unitary(double b, double beta, double e1) {
  const double a = std::sqrt(1 - b * b);
  Mat v = Mat::Zero(4, 4);
  v(0, 0) = 1;
  v(1, 1) = -a;
  v(2, 1) = b;
  v(1, 2) = b;
  v(2, 2) = a;
  v(3, 3) = 1;
  Vec ph(4);
  const double e2 = 0.0, e3 = beta, e4 = e2 + e3 - e1;
  ph << std::exp(-I * e1), std::exp(-I * e2), std::exp(-I * e3), std::exp(-I * e4);
  return v * ph.asDiagonal() * v.adjoint();
}

// Entanglement entropy of a pure two-qubit state.
double pure_entropy(const Vec& psi) {
  Eigen::SelfAdjointEigenSolver<Mat> es(partial_trace(projector(psi), {2, 2}, {0}));
  double s = 0;
  for (int k = 0; k < 2; ++k) {
    const double p = es.eigenvalues()(k);
    if (p > 1e-15) s -= p * std::log2(p);
  }
  return s;
}

// Convex-roof oracle: minimize Σ p_k S(ψ_k) over 4-element decompositions of a rank-2 state,
// parametrized by a 2x4 isometry, with Nelder–Mead and restarts.
double convex_roof_ef(const Mat& rho, std::mt19937_64& rng) {
  Eigen::SelfAdjointEigenSolver<Mat> es(rho);
  Mat w(4, 2);
  for (int k = 0; k < 2; ++k) w.col(k) = std::sqrt(std::max(0.0, es.eigenvalues()(2 + k))) * es.eigenvectors().col(2 + k);
  auto cost = [&](const std::vector<double>& x) {
    Mat m(4, 2);
    for (int i = 0; i < 8; ++i) m(i / 2, i % 2) = cplx(x[2 * i], x[2 * i + 1]);
    Eigen::HouseholderQR<Mat> qr(m);
    Mat q = qr.householderQ() * Mat::Identity(4, 2);  // 4x2, orthonormal columns
    Mat states = w * q.transpose();                    // columns are unnormalized ψ_k
    double total = 0;
    for (int k = 0; k < 4; ++k) {
      const double p = states.col(k).squaredNorm();
      if (p > 1e-14) total += p * pure_entropy(states.col(k) / std::sqrt(p));
    }
    return total;
  };
  std::normal_distribution<double> g;
  double best = 1e9;
  const int n = 16;
  for (int restart = 0; restart < 12; ++restart) {
    std::vector<std::vector<double>> simplex(n + 1, std::vector<double>(n));
    for (auto& v : simplex)
      for (double& c : v) c = g(rng);
    std::vector<double> f(n + 1);
    for (int i = 0; i <= n; ++i) f[i] = cost(simplex[i]);
    for (int it = 0; it < 6000; ++it) {
      std::vector<int> order(n + 1);
      for (int i = 0; i <= n; ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](int x, int y) { return f[x] < f[y]; });
      const int lo = order[0], hi = order[n], nh = order[n - 1];
      std::vector<double> c(n, 0.0);
      for (int i = 0; i <= n; ++i)
        if (i != hi)
          for (int d = 0; d < n; ++d) c[d] += simplex[i][d] / n;
      auto along = [&](double s) {
        std::vector<double> v(n);
        for (int d = 0; d < n; ++d) v[d] = c[d] + s * (simplex[hi][d] - c[d]);
        return v;
      };
      auto r = along(-1.0);
      double fr = cost(r);
      if (fr < f[lo]) {
        auto e = along(-2.0);
        double fe = cost(e);
        if (fe < fr) { simplex[hi] = e; f[hi] = fe; } else { simplex[hi] = r; f[hi] = fr; }
      } else if (fr < f[nh]) {
        simplex[hi] = r;
        f[hi] = fr;
      } else {
        auto k = along(0.5);
        double fk = cost(k);
        if (fk < f[hi]) {
          simplex[hi] = k;
          f[hi] = fk;
        } else {
          for (int i = 0; i <= n; ++i)
            if (i != lo) {
              for (int d = 0; d < n; ++d) simplex[i][d] = simplex[lo][d] + 0.5 * (simplex[i][d] - simplex[lo][d]);
              f[i] = cost(simplex[i]);
            }
        }
      }
    }
    best = std::min(best, *std::min_element(f.begin(), f.end()));
  }
  return best;
}

}  // namespace

TEST_CASE("linear entropy") {
  CHECK(linear_entropy(projector(Vec::Unit(4, 1))) == doctest::Approx(0.0));
  CHECK(linear_entropy(projector(bell())) == doctest::Approx(0.5));
  // XY evolution of |↓↑⟩ for a·t = π/4.
  const double a = 0.8;
  Mat h = Mat::Zero(4, 4);
  h(1, 2) = h(2, 1) = a;
  Vec psi = propagator(h, M_PI / (4 * a)) * Vec::Unit(4, 1);
  CHECK(linear_entropy(projector(psi)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(linear_entropy_pure(psi) == doctest::Approx(0.5).epsilon(1e-12));
  Mat bad = Mat::Identity(4, 4);
  CHECK_THROWS_AS(linear_entropy(bad), InvalidState);
}

TEST_CASE("Monte-Carlo entangling power") {
  EntanglingPowerEstimate id = entangling_power_mc(Mat::Identity(4, 4), 5000, 1);
  CHECK(id.mean < 1e-15);
  CHECK(id.std_error < 1e-15);
  EntanglingPowerEstimate c = entangling_power_mc(cnot(), 100000, 7, 4);
  CHECK(std::abs(c.mean - 2.0 / 9) <= 3 * c.std_error);
  CHECK(c.mean <= 0.2223);
  CHECK_THROWS_AS(entangling_power_mc(2.0 * Mat::Identity(4, 4), 10, 1), NotUnitary);
}

TEST_CASE("Monte-Carlo estimate is deterministic and independent of jobs") {
  std::mt19937_64 rng(3);
  Mat u = random_unitary(4, rng);
  auto a = entangling_power_mc(u, 20000, 99, 1);
  auto b = entangling_power_mc(u, 20000, 99, 3);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  CHECK(entangling_power_mc(u, 20000, 100).mean != a.mean);
}

TEST_CASE("Monte-Carlo entangling power is invariant under local unitaries") {
  std::mt19937_64 rng(5);
  Mat u = random_unitary(4, rng);
  Mat dressed = kron(random_unitary(2, rng), random_unitary(2, rng)) * u * kron(random_unitary(2, rng), random_unitary(2, rng));
  auto x = entangling_power_mc(u, 60000, 1), y = entangling_power_mc(dressed, 60000, 2);
  CHECK(std::abs(x.mean - y.mean) <= 4 * std::hypot(x.std_error, y.std_error));
}

TEST_CASE("symmetric entangling power") {
  CHECK(entangling_power_symmetric(0.3, 0.0) == 0.0);
  const double a = 1.983e-3;
  CHECK(entangling_power_symmetric(a, M_PI / (2 * a)) == doctest::Approx(2.0 / 9).epsilon(1e-12));
  CHECK(entangling_power_symmetric(a, M_PI / (4 * a)) == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(entangling_power_symmetric(a, 1234.5) == doctest::Approx(entangling_power_symmetric(a, 1234.5 + M_PI / a)));
  SymmetricSpectrum s = symmetric_spectrum(demf_params());
  Mat u = propagator(symmetric_block_xy(s, Sublevel::Plus), M_PI / (2 * s.a_plus));
  auto est = entangling_power_mc(u, 100000, 11);
  CHECK(std::abs(est.mean - 2.0 / 9) <= 3 * est.std_error);
}

TEST_CASE("Lemma-1 entangling power") {
  for (double beta : {0.0, 0.7, 2.0, M_PI}) {
    CHECK(entangling_power_lemma(0.0, beta) == 0.0);
    CHECK(entangling_power_lemma(1.0, beta) == doctest::Approx(0.0));
  }
  CHECK(entangling_power_lemma(1 / std::sqrt(2.0), M_PI) == doctest::Approx(2.0 / 9).epsilon(1e-12));
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ub(0.0, 1.0), ubeta(0.0, 2 * M_PI);
  for (int trial = 0; trial < 5; ++trial) {
    const double b = ub(rng), beta = ubeta(rng);
    CHECK(std::abs(entangling_power_lemma(b, beta) - entangling_power_lemma(std::sqrt(1 - b * b), beta)) <= 1e-12);
    auto est = entangling_power_mc(lemma_unitary(b, beta, 0.4), 40000, 100 + trial);
    CHECK(std::abs(est.mean - entangling_power_lemma(b, beta)) <= 3 * est.std_error);
  }
}

TEST_CASE("crossover entangling power") {
  for (double t : {0.0, 10.0, 333.0, 4000.0}) {
    CHECK(crossover_entangling_power(3e-4, 0.0, t) == doctest::Approx(entangling_power_symmetric(3e-4, t)));
  }
  CHECK(max_entangling_power(0.0) == doctest::Approx(2.0 / 9).epsilon(1e-12));
  CHECK(max_entangling_power(1.0) == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(max_entangling_power(10.0) == doctest::Approx(2.0 / 9 * 201 / (101.0 * 101)).epsilon(1e-12));
  const double a = 2e-3;
  double peak = 0;
  for (int k = 0; k <= 20000; ++k) peak = std::max(peak, crossover_entangling_power(a, 1.0, k * 0.05));
  CHECK(peak == doctest::Approx(1.0 / 6).epsilon(1e-6));
  for (double chi : {0.0, 0.3, 1.0, 2.5}) {
    for (double t : {10.0, 250.0, 777.0}) {
      const double r = std::sqrt(1 + chi * chi);
      const double c = std::sqrt(0.5 * (1 + chi / r));
      const double beta = 2 * t * a * r;
      CHECK(crossover_entangling_power(a, chi, t) == doctest::Approx(entangling_power_lemma(c, beta)).epsilon(1e-12));
      CHECK(crossover_entangling_power(a, chi, t) <= max_entangling_power(chi) + 1e-12);
    }
  }
  double prev = 1;
  for (double chi = 0.8; chi < 20; chi += 0.4) {
    CHECK(max_entangling_power(chi) < prev);
    prev = max_entangling_power(chi);
  }
}

TEST_CASE("concurrence and entanglement of formation") {
  CHECK(concurrence(projector(bell())) == doctest::Approx(1.0));
  CHECK(entanglement_of_formation(projector(bell())) == doctest::Approx(1.0));
  std::mt19937_64 rng(17);
  Mat prod = kron(projector(random_state(2, rng)), projector(random_state(2, rng)));
  CHECK(concurrence(prod) == doctest::Approx(0.0).epsilon(1e-7));
  CHECK(entanglement_of_formation(prod) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(ef_from_concurrence(1.0) == 1.0);
  CHECK(ef_from_concurrence(0.0) == 0.0);
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);

  // Analytic post-decay states.
  const double x = 0.05;
  Mat r2 = Mat::Zero(4, 4);
  r2(1, 1) = x * x;
  r2(1, 2) = I * x;
  r2(2, 1) = -I * x;
  r2(2, 2) = 2 + x * x;
  r2 /= (2 + 2 * x * x);
  CHECK(concurrence(r2) == doctest::Approx(x / (1 + x * x)).epsilon(1e-9));
  Mat r3 = 0.25 * Mat::Identity(4, 4);
  r3(1, 2) = r3(2, 1) = 0.25;
  CHECK(concurrence(r3) == doctest::Approx(0.0));
  CHECK(entanglement_of_formation(r3) == doctest::Approx(0.0));
  Mat r1 = Mat::Zero(4, 4);
  r1(1, 1) = r1(2, 2) = 0.5;
  CHECK(purity(r1) == doctest::Approx(0.5));
}

TEST_CASE("EF monotonicity") {
  double prev = 2;
  for (double c = 1.0; c >= 0.0; c -= 0.05) {
    const double e = ef_from_concurrence(c);
    CHECK(e <= prev + 1e-15);
    prev = e;
  }
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    Mat rho = projector(random_state(4, rng));
    double last = 2;
    for (double w = 0; w <= 1.0; w += 0.1) {
      Mat mixed = (1 - w) * rho + w * 0.25 * Mat::Identity(4, 4);
      const double e = entanglement_of_formation(mixed);
      CHECK(e >= 0.0);
      CHECK(e <= 1.0);
      CHECK(e <= last + 1e-12);
      last = e;
    }
  }
}

TEST_CASE("Wootters EF matches a brute-force convex roof") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double p = u(rng);
    Mat rho = p * projector(random_state(4, rng)) + (1 - p) * projector(random_state(4, rng));
    const double roof = convex_roof_ef(rho, rng);
    const double ef = entanglement_of_formation(rho);
    CHECK(ef <= roof + 1e-9);
    CHECK(roof - ef <= 1e-3);
  }
}

TEST_CASE("purity and fidelity") {
  CHECK(purity(projector(bell())) == doctest::Approx(1.0));
  CHECK(purity(0.25 * Mat::Identity(4, 4)) == doctest::Approx(0.25));
  CHECK(fidelity(projector(bell()), bell()) == doctest::Approx(1.0));
  CHECK(fidelity(projector(bell()), projector(bell())) == doctest::Approx(1.0).epsilon(1e-7));
  Mat mixed = 0.25 * Mat::Identity(4, 4);
  CHECK(fidelity(mixed, bell()) == doctest::Approx(0.25));
  CHECK(fidelity(mixed, projector(bell())) == doctest::Approx(0.25).epsilon(1e-7));
}
