#pragma once

// Exact, non-private sliding-window reference implementations used by
// tests and accuracy reports. Deliberately wasteful (keeps raw rows,
// O(Wd) space) so it stays trustworthy.

#include <cstdint>
#include <deque>

#include "dpmat/linalg.hpp"

namespace dpmat {

class WindowBuffer {
 public:
  WindowBuffer(std::uint64_t W, int d);

  void push(const Vector& a);

  // Running covariance of the buffered rows. Refreshed from scratch
  // periodically to keep subtraction drift below the advertised 1e-10.
  const Matrix& exact_covariance() const { return cov_; }
  Matrix recompute_covariance() const;

  std::uint64_t window() const { return W_; }
  int dim() const { return d_; }
  std::size_t size() const { return rows_.size(); }
  const std::deque<Vector>& rows() const { return rows_; }

  // Buffered rows stacked into an n x d matrix, oldest first.
  Matrix window_matrix() const;

 private:
  std::uint64_t W_;
  int d_;
  std::deque<Vector> rows_;
  Matrix cov_;
  std::uint64_t pushes_ = 0;
};

// Textbook answers that serve as OPT in every inequality test.
Projection exact_pca(const WindowBuffer& buf, int k);
// ||A_W (I - P)||_F.
double pca_residual(const WindowBuffer& buf, const Projection& p);
double pca_residual_cov(const Matrix& cov, const Projection& p);
// Rows are stacked (a | b) with b the last p coordinates; returns the
// least-squares X = pinv(S_AA) S_AB.
Matrix exact_regress(const WindowBuffer& buf, int p);
// ||A_W X - B_W||_F^2 for a candidate X on the stacked window.
double regress_objective(const WindowBuffer& buf, int p, const Matrix& X);
double exact_variance(const WindowBuffer& buf, const Vector& x);

// True iff mult_lo*A_cov + add_lo*I <= S <= mult_hi*A_cov + add_hi*I in
// the Loewner order, each side tested with the standard tolerance floor
// of the dominating matrix (or an explicit one).
bool sandwich_check(const Matrix& S, const Matrix& A_cov, double mult_lo,
                    double mult_hi, double add_lo, double add_hi);
bool sandwich_check(const Matrix& S, const Matrix& A_cov, double mult_lo,
                    double mult_hi, double add_lo, double add_hi, double tol);

}  // namespace dpmat
