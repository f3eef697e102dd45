#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "tripent/errors.hpp"

namespace tripent {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr cplx I{0.0, 1.0};

// Kronecker product; the left factor is the slow index.
Mat kron(const Mat& a, const Mat& b);
Mat kron(std::initializer_list<Mat> factors);

// Frobenius norm, used as the scale for all relative tolerances.
double norm(const Mat& m);

bool is_hermitian(const Mat& m, double tol = 1e-10);
bool is_unitary(const Mat& m, double tol = 1e-10);

// Hermiticity is checked against tol·max(1, ‖h‖).
struct Eigh {
  RVec values;   // ascending
  Mat vectors;   // orthonormal columns
};
Eigh eigh(const Mat& h, double tol = 1e-10);

// exp(−i h t) via eigendecomposition.
Mat propagator(const Mat& h, double t, double tol = 1e-10);

// Traces out every factor not listed in `keep`; kept factors retain their order.
Mat partial_trace(const Mat& rho, const std::vector<int>& dims, const std::vector<int>& keep);

Mat projector(const Vec& psi);
Mat commutator(const Mat& a, const Mat& b);
Mat anticommutator(const Mat& a, const Mat& b);
Mat hermitian_part(const Mat& m);

// DensityMatrix invariants: Hermitian, unit trace, min eigenvalue ≥ −neg_tol.
bool is_density_matrix(const Mat& rho, double tol = 1e-10, double neg_tol = 1e-8);
void require_density_matrix(const Mat& rho, double tol = 1e-10, double neg_tol = 1e-8);
double min_eigenvalue(const Mat& h);

}  // namespace tripent
