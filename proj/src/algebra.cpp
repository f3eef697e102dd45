#include "tripent/algebra.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>
#include <sstream>

namespace tripent {

Mat kron(const Mat& a, const Mat& b) {
  const Eigen::Index ra = a.rows(), ca = a.cols(), rb = b.rows(), cb = b.cols();
  Mat out(ra * rb, ca * cb);
  for (Eigen::Index i = 0; i < ra; ++i)
    for (Eigen::Index j = 0; j < ca; ++j) out.block(i * rb, j * cb, rb, cb) = a(i, j) * b;
  return out;
}

Mat kron(std::initializer_list<Mat> factors) {
  Mat out = Mat::Identity(1, 1);
  for (const Mat& f : factors) out = kron(out, f);
  return out;
}

double norm(const Mat& m) { return m.norm(); }

bool is_hermitian(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, norm(m));
}

bool is_unitary(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m.adjoint() * m - Mat::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

Eigh eigh(const Mat& h, double tol) {
  if (!is_hermitian(h, tol)) throw NotHermitian("eigh: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Mat> solver(hermitian_part(h));
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Mat propagator(const Mat& h, double t, double tol) {
  if (t == 0.0) {
    if (!is_hermitian(h, tol)) throw NotHermitian("propagator: matrix is not Hermitian");
    return Mat::Identity(h.rows(), h.cols());
  }
  const Eigh e = eigh(h, tol);
  Vec phases(e.values.size());
  for (Eigen::Index k = 0; k < e.values.size(); ++k) phases(k) = std::exp(-I * e.values(k) * t);
  return e.vectors * phases.asDiagonal() * e.vectors.adjoint();
}

Mat partial_trace(const Mat& rho, const std::vector<int>& dims, const std::vector<int>& keep) {
  const long total = std::accumulate(dims.begin(), dims.end(), 1L, std::multiplies<>());
  if (dims.empty() || rho.rows() != total || rho.cols() != total) {
    std::ostringstream msg;
    msg << "partial_trace: factor dimensions multiply to " << total << " but matrix is "
        << rho.rows() << "x" << rho.cols();
    throw DimensionMismatch(msg.str());
  }
  const int n = static_cast<int>(dims.size());
  std::vector<bool> kept(n, false);
  for (int k : keep) {
    if (k < 0 || k >= n) throw DimensionMismatch("partial_trace: keep index out of range");
    kept[k] = true;
  }
  long dk = 1;
  for (int f = 0; f < n; ++f)
    if (kept[f]) dk *= dims[f];

  // Split a flat index into (kept index, traced index) using the original factor order.
  auto split = [&](long flat, long& ik, long& it) {
    ik = 0;
    it = 0;
    long stride_k = 1, stride_t = 1;
    for (int f = n - 1; f >= 0; --f) {
      const long digit = flat % dims[f];
      flat /= dims[f];
      if (kept[f]) {
        ik += digit * stride_k;
        stride_k *= dims[f];
      } else {
        it += digit * stride_t;
        stride_t *= dims[f];
      }
    }
  };

  std::vector<long> kidx(total), tidx(total);
  for (long x = 0; x < total; ++x) split(x, kidx[x], tidx[x]);

  Mat out = Mat::Zero(dk, dk);
  for (long r = 0; r < total; ++r)
    for (long c = 0; c < total; ++c)
      if (tidx[r] == tidx[c]) out(kidx[r], kidx[c]) += rho(r, c);
  return out;
}

Mat projector(const Vec& psi) { return psi * psi.adjoint(); }

Mat commutator(const Mat& a, const Mat& b) { return a * b - b * a; }

Mat anticommutator(const Mat& a, const Mat& b) { return a * b + b * a; }

Mat hermitian_part(const Mat& m) { return 0.5 * (m + m.adjoint()); }

double min_eigenvalue(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> solver(hermitian_part(h), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

bool is_density_matrix(const Mat& rho, double tol, double neg_tol) {
  if (!is_hermitian(rho, tol)) return false;
  if (std::abs(rho.trace() - 1.0) > tol) return false;
  return min_eigenvalue(rho) >= -neg_tol;
}

void require_density_matrix(const Mat& rho, double tol, double neg_tol) {
  if (!is_density_matrix(rho, tol, neg_tol))
    throw InvalidState("matrix is not a valid density matrix");
}

}  // namespace tripent
