// Dense symmetric eigensolver: Householder reduction to tridiagonal form
// followed by the implicit QL algorithm with Wilkinson shifts. Fully
// deterministic for a fixed kernel table.
#pragma once

#include <span>
#include <vector>

#include "mrflearn/matrix.hpp"

namespace mrflearn {

struct TridiagonalForm {
  std::vector<double> diag;
  // offdiag[i] couples rows i and i+1; offdiag.back() == 0.
  std::vector<double> offdiag;
  // Row k holds the Householder vector of step k in columns k+1.. (leading 1).
  DenseMatrix reflectors;
  std::vector<double> tau;
};

// Reduces the symmetric matrix `a` (full storage, both triangles) so that
// a = Q T Q^T with Q = H_0 H_1 ... H_{n-3}.
TridiagonalForm tridiagonalize(DenseMatrix a);

// v <- Q^T v
void apply_q_transpose(const TridiagonalForm& form, std::span<double> v);

// Q^T, whose rows are the columns of Q.
DenseMatrix q_transpose(const TridiagonalForm& form);

// Implicit QL on the tridiagonal (diag, offdiag). Every plane rotation on
// indices (i, i+1) is also applied to rows i and i+1 of `rows` when given.
// On return diag holds the eigenvalues (unsorted). Throws NumericalError if
// an eigenvalue fails to converge.
void tridiagonal_ql(std::vector<double>& diag, std::vector<double>& offdiag, DenseMatrix* rows);

struct SymmetricEigen {
  std::vector<double> values;  // solver order (unsorted)
  DenseMatrix vectors;         // row k is the unit eigenvector for values[k]
};

SymmetricEigen symmetric_eigen(DenseMatrix a);
std::vector<double> symmetric_eigenvalues(DenseMatrix a);

// Eigenvalues together with the coefficients <u_k, v_j> of the given vectors
// (rows of `vs`) in the eigenbasis, without forming the eigenvectors.
struct SymmetricProjection {
  std::vector<double> values;   // solver order, same as symmetric_eigen
  DenseMatrix coefficients;     // coefficients(k, j) = <u_k, v_j>
};
SymmetricProjection symmetric_eigen_project(DenseMatrix a, const DenseMatrix& vs);

// Solves a x = b for symmetric positive definite a by Cholesky factorization.
// Throws NumericalError if a is not numerically positive definite.
std::vector<double> solve_spd(DenseMatrix a, std::span<const double> b);

}  // namespace mrflearn
