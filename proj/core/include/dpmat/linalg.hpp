#pragma once

// Dense real linear algebra used by every other module: symmetric
// eigensolves, SVD helpers, pseudoinverse, Loewner-order tests.
// All functions are pure.

#include <Eigen/Dense>

#include "dpmat/errors.hpp"

namespace dpmat {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct EigenPair {
  Vector values;   // sorted descending
  Matrix vectors;  // orthonormal columns, same order as values
};

// Rank-k orthogonal projection P = V_k V_k^T.
struct Projection {
  int dim = 0;
  int rank = 0;
  Matrix P;
};

bool is_finite(const Matrix& A);

// Throws InputError unless S is square and symmetric to within
// 1e-12 * max(1, ||S||_F) per entry.
void require_symmetric(const Matrix& S, const char* who);

// Largest |eigenvalue| of a symmetric matrix.
double spectral_norm_sym(const Matrix& S);

// Tolerance floor for Loewner comparisons against dominating side B:
// 1e-9 * max(1, ||B||_2).
double loewner_tol(const Matrix& B);

// Spectral decomposition, eigenvalues descending, reconstruction within
// 1e-8 * ||S||_F. Eigenvector signs follow the first-nonzero-positive
// convention so results are reproducible.
EigenPair sym_eigen(const Matrix& S);

// True iff lambda_min(B - A) >= -tol, i.e. A <= B up to tol in the
// Loewner order.
bool psd_dominates(const Matrix& A, const Matrix& B, double tol);

// Top-k right singular subspace of A as orthonormal columns, ties broken
// by the sign convention (first nonzero coordinate of each column
// positive).
Matrix top_k_right_subspace(const Matrix& A, int k);

// Moore-Penrose pseudoinverse of a symmetric matrix; singular values
// below 1e-10 * s_max are treated as zero.
Matrix pinv(const Matrix& S);

// argmin over rank-k X of ||C X R - F||_F for C with orthonormal columns
// and R with orthonormal rows; equals [C^T F R^T]_k.
Matrix solve_rank_constrained(const Matrix& C, const Matrix& R,
                              const Matrix& F, int k);

// Best rank-k approximation in Frobenius norm (Eckart-Young).
Matrix truncate_rank(const Matrix& M, int k);

// Symmetric PSD square root; negative eigenvalues are clamped to zero
// first. Returns B with B = B^T and B*B ~= S for PSD S.
Matrix sym_psd_sqrt(const Matrix& S);

// Projection of a symmetric matrix onto the PSD cone (negative
// eigenvalues zeroed).
Matrix clip_psd(const Matrix& S);

// Flip columns so the first coordinate with |v_i| > 1e-12 is positive.
void apply_sign_convention(Matrix& V);

// Checks dim/rank/symmetry, P^2 = P, eigenvalues in {0,1} and trace = k,
// each within tol.
bool validate_projection(const Projection& p, double tol = 1e-8);

}  // namespace dpmat
