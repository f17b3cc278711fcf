#include "dpmat/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dpmat {
namespace {

void require_square(const Matrix& S, const char* who) {
  if (S.rows() != S.cols()) {
    throw InputError(std::string(who) + ": matrix must be square, got " +
                     std::to_string(S.rows()) + "x" +
                     std::to_string(S.cols()));
  }
}

void require_finite(const Matrix& A, const char* who) {
  if (!is_finite(A)) {
    throw InputError(std::string(who) + ": non-finite entries");
  }
}

}  // namespace

bool is_finite(const Matrix& A) { return A.allFinite(); }

void require_symmetric(const Matrix& S, const char* who) {
  require_square(S, who);
  require_finite(S, who);
  const double tol = 1e-12 * std::max(1.0, S.norm());
  const double asym = (S - S.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol) {
    throw InputError(std::string(who) + ": matrix not symmetric (max |S - S^T| = " +
                     std::to_string(asym) + ")");
  }
}

double spectral_norm_sym(const Matrix& S) {
  if (S.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double loewner_tol(const Matrix& B) {
  return 1e-9 * std::max(1.0, spectral_norm_sym(B));
}

EigenPair sym_eigen(const Matrix& S) {
  require_symmetric(S, "sym_eigen");
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  EigenPair out;
  // Eigen returns ascending order; flip to descending.
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  apply_sign_convention(out.vectors);
  return out;
}

bool psd_dominates(const Matrix& A, const Matrix& B, double tol) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) {
    throw InputError("psd_dominates: dimension mismatch");
  }
  if (tol < 0) throw InputError("psd_dominates: tol must be >= 0");
  require_finite(A, "psd_dominates");
  require_finite(B, "psd_dominates");
  Matrix D = B - A;
  D = ((D + D.transpose()) * 0.5).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(D, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

void apply_sign_convention(Matrix& V) {
  for (Eigen::Index j = 0; j < V.cols(); ++j) {
    for (Eigen::Index i = 0; i < V.rows(); ++i) {
      const double v = V(i, j);
      if (std::abs(v) > 1e-12) {
        if (v < 0) V.col(j) = -V.col(j);
        break;
      }
    }
  }
}

Matrix top_k_right_subspace(const Matrix& A, int k) {
  require_finite(A, "top_k_right_subspace");
  if (k < 1 || k > A.cols()) {
    throw InputError("top_k_right_subspace: k=" + std::to_string(k) +
                     " out of range for " + std::to_string(A.cols()) +
                     " columns");
  }
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinV);
  Matrix V = svd.matrixV();
  // Thin V has min(rows, cols) columns; if A has fewer rows than k we
  // still owe k orthonormal directions, so extend with an orthonormal
  // complement via full-pivot QR of V.
  if (V.cols() < k) {
    Eigen::ColPivHouseholderQR<Matrix> qr(V);
    Matrix Q = qr.householderQ() * Matrix::Identity(A.cols(), A.cols());
    Matrix ext(A.cols(), k);
    ext.leftCols(V.cols()) = V;
    ext.rightCols(k - V.cols()) =
        Q.rightCols(A.cols() - V.cols()).leftCols(k - V.cols());
    V = ext;
  }
  Matrix Vk = V.leftCols(k);
  apply_sign_convention(Vk);
  return Vk;
}

Matrix pinv(const Matrix& S) {
  require_symmetric(S, "pinv");
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  const Vector& lam = es.eigenvalues();
  const Matrix& U = es.eigenvectors();
  const double smax = lam.cwiseAbs().maxCoeff();
  const double cutoff = 1e-10 * smax;
  Vector inv = Vector::Zero(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (std::abs(lam(i)) > cutoff && lam(i) != 0.0) inv(i) = 1.0 / lam(i);
  }
  Matrix P = U * inv.asDiagonal() * U.transpose();
  return ((P + P.transpose()) * 0.5).eval();
}

Matrix truncate_rank(const Matrix& M, int k) {
  require_finite(M, "truncate_rank");
  if (k < 0) throw InputError("truncate_rank: negative rank");
  if (k >= std::min(M.rows(), M.cols())) return M;
  if (k == 0) return Matrix::Zero(M.rows(), M.cols());
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector s = svd.singularValues();
  for (Eigen::Index i = k; i < s.size(); ++i) s(i) = 0.0;
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

Matrix solve_rank_constrained(const Matrix& C, const Matrix& R,
                              const Matrix& F, int k) {
  require_finite(C, "solve_rank_constrained");
  require_finite(R, "solve_rank_constrained");
  require_finite(F, "solve_rank_constrained");
  if (C.rows() != F.rows() || R.cols() != F.cols()) {
    throw InputError("solve_rank_constrained: nonconforming dimensions");
  }
  const double ctol = 1e-8;
  if ((C.transpose() * C - Matrix::Identity(C.cols(), C.cols())).norm() >
      ctol * std::max<double>(1.0, C.cols())) {
    throw InputError("solve_rank_constrained: C columns not orthonormal");
  }
  if ((R * R.transpose() - Matrix::Identity(R.rows(), R.rows())).norm() >
      ctol * std::max<double>(1.0, R.rows())) {
    throw InputError("solve_rank_constrained: R rows not orthonormal");
  }
  if (k < 1 || k > std::min(C.cols(), R.rows())) {
    throw InputError("solve_rank_constrained: k out of range");
  }
  Matrix M = C.transpose() * F * R.transpose();
  return truncate_rank(M, k);
}

Matrix sym_psd_sqrt(const Matrix& S) {
  require_symmetric(S, "sym_psd_sqrt");
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  Vector lam = es.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    lam(i) = lam(i) > 0 ? std::sqrt(lam(i)) : 0.0;
  }
  Matrix B = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  return ((B + B.transpose()) * 0.5).eval();
}

Matrix clip_psd(const Matrix& S) {
  require_symmetric(S, "clip_psd");
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  Vector lam = es.eigenvalues().cwiseMax(0.0);
  Matrix C = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  return ((C + C.transpose()) * 0.5).eval();
}

bool validate_projection(const Projection& p, double tol) {
  if (p.dim <= 0 || p.rank < 0 || p.rank > p.dim) return false;
  if (p.P.rows() != p.dim || p.P.cols() != p.dim) return false;
  if (!is_finite(p.P)) return false;
  if ((p.P - p.P.transpose()).cwiseAbs().maxCoeff() > tol) return false;
  if ((p.P * p.P - p.P).cwiseAbs().maxCoeff() > tol) return false;
  if (std::abs(p.P.trace() - p.rank) > tol) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(
      ((p.P + p.P.transpose()) * 0.5).eval(), Eigen::EigenvaluesOnly);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = es.eigenvalues()(i);
    if (std::min(std::abs(l), std::abs(l - 1.0)) > tol) return false;
  }
  return true;
}

}  // namespace dpmat
