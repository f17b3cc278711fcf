#include "dpmat/oracle.hpp"

#include <cmath>
#include <string>

#include "dpmat/errors.hpp"

namespace dpmat {

WindowBuffer::WindowBuffer(std::uint64_t W, int d) : W_(W), d_(d) {
  if (W < 1) throw InputError("WindowBuffer: W must be >= 1");
  if (d < 1) throw InputError("WindowBuffer: d must be >= 1");
  cov_ = Matrix::Zero(d, d);
}

void WindowBuffer::push(const Vector& a) {
  if (a.size() != d_) {
    throw InputError("WindowBuffer: row has dimension " +
                     std::to_string(a.size()) + ", expected " +
                     std::to_string(d_));
  }
  if (!a.allFinite()) throw InputError("WindowBuffer: non-finite row");
  rows_.push_back(a);
  cov_.selfadjointView<Eigen::Lower>().rankUpdate(a, 1.0);
  if (rows_.size() > W_) {
    cov_.selfadjointView<Eigen::Lower>().rankUpdate(rows_.front(), -1.0);
    rows_.pop_front();
  }
  cov_.triangularView<Eigen::StrictlyUpper>() = cov_.transpose();
  // Periodic refresh keeps add/subtract drift well under 1e-10 relative.
  if (++pushes_ % 4096 == 0) cov_ = recompute_covariance();
}

Matrix WindowBuffer::recompute_covariance() const {
  Matrix c = Matrix::Zero(d_, d_);
  for (const auto& r : rows_) {
    c.selfadjointView<Eigen::Lower>().rankUpdate(r, 1.0);
  }
  c.triangularView<Eigen::StrictlyUpper>() = c.transpose();
  return c;
}

Matrix WindowBuffer::window_matrix() const {
  Matrix A(static_cast<Eigen::Index>(rows_.size()), d_);
  Eigen::Index i = 0;
  for (const auto& r : rows_) A.row(i++) = r.transpose();
  return A;
}

Projection exact_pca(const WindowBuffer& buf, int k) {
  if (k < 1 || k > buf.dim()) throw InputError("exact_pca: k out of range");
  EigenPair ep = sym_eigen(buf.exact_covariance());
  Matrix Vk = ep.vectors.leftCols(k);
  Projection p;
  p.dim = buf.dim();
  p.rank = k;
  p.P = Vk * Vk.transpose();
  return p;
}

double pca_residual_cov(const Matrix& cov, const Projection& p) {
  // ||A(I-P)||_F^2 = tr(S) - tr(PS) for idempotent symmetric P.
  const double v = cov.trace() - (p.P * cov).trace();
  return std::sqrt(std::max(0.0, v));
}

double pca_residual(const WindowBuffer& buf, const Projection& p) {
  return pca_residual_cov(buf.exact_covariance(), p);
}

Matrix exact_regress(const WindowBuffer& buf, int p) {
  const int d = buf.dim();
  if (p < 1 || p >= d) throw InputError("exact_regress: p out of range");
  const int da = d - p;
  const Matrix& S = buf.exact_covariance();
  Matrix Saa = S.topLeftCorner(da, da);
  Matrix Sab = S.topRightCorner(da, p);
  return pinv(Saa) * Sab;
}

double regress_objective(const WindowBuffer& buf, int p, const Matrix& X) {
  const int d = buf.dim();
  if (p < 1 || p >= d) throw InputError("regress_objective: p out of range");
  const int da = d - p;
  if (X.rows() != da || X.cols() != p) {
    throw InputError("regress_objective: X has wrong shape");
  }
  const Matrix& S = buf.exact_covariance();
  Matrix Saa = S.topLeftCorner(da, da);
  Matrix Sab = S.topRightCorner(da, p);
  Matrix Sbb = S.bottomRightCorner(p, p);
  const double v = (X.transpose() * Saa * X).trace() -
                   2.0 * (X.transpose() * Sab).trace() + Sbb.trace();
  return std::max(0.0, v);
}

double exact_variance(const WindowBuffer& buf, const Vector& x) {
  if (x.size() != buf.dim()) throw InputError("exact_variance: bad dimension");
  return x.dot(buf.exact_covariance() * x);
}

bool sandwich_check(const Matrix& S, const Matrix& A_cov, double mult_lo,
                    double mult_hi, double add_lo, double add_hi) {
  const int d = static_cast<int>(S.rows());
  Matrix lower = mult_lo * A_cov + add_lo * Matrix::Identity(d, d);
  Matrix upper = mult_hi * A_cov + add_hi * Matrix::Identity(d, d);
  return psd_dominates(lower, S, loewner_tol(S)) &&
         psd_dominates(S, upper, loewner_tol(upper));
}

bool sandwich_check(const Matrix& S, const Matrix& A_cov, double mult_lo,
                    double mult_hi, double add_lo, double add_hi, double tol) {
  const int d = static_cast<int>(S.rows());
  Matrix lower = mult_lo * A_cov + add_lo * Matrix::Identity(d, d);
  Matrix upper = mult_hi * A_cov + add_hi * Matrix::Identity(d, d);
  return psd_dominates(lower, S, tol) && psd_dominates(S, upper, tol);
}

}  // namespace dpmat
