#pragma once

// Query layer over histogram summaries: spectral approximation, PCA,
// constrained PCA via pluggable solvers, generalized regression,
// directional-variance and cut queries. Everything here is
// post-processing of an already-released summary, so privacy is
// unaffected by query choice.

#include <functional>
#include <string>
#include <vector>

#include "dpmat/histogram.hpp"
#include "dpmat/linalg.hpp"

namespace dpmat {

struct SpectralAnswer {
  Matrix C;                  // d x d covariance estimate
  double sigma_shift = 0.0;  // sigma^2 subtracted (jl mode)
  bool clipped = false;
};

// C = A~^T A~ - sigma^2 I (sigma = 0 outside jl mode). With clip, negative
// eigenvalues are zeroed so lambda_min(C) >= -1e-10 ||C||_2.
SpectralAnswer spectral_approx(const SpectralHistogram& h, bool clip);

// A matrix B whose Gram B^T B equals the summary covariance: the sketch
// itself in jl mode, the symmetric PSD square root otherwise. The common
// input shape for subspace extraction.
Matrix summary_factor(const SpectralHistogram& h);

// Rank-k PCA projection from the summary. Warns when the histogram's rank
// parameter differs from ceil((k + ln(1/beta))/eta).
Projection pca(const SpectralHistogram& h, int k);

// Expected sketch rank for a PCA at rank k.
int pca_rank_param(int k, double eta, double beta);

// A constrained-PCA solver: maps (summary factor, k) to a projection in
// its constraint set. gamma is the declared approximation factor
// (infinity when the solver is a heuristic with no worst-case guarantee;
// tests measure the realized factor instead).
struct SolverHook {
  std::string name;
  double gamma = 1.0;
  std::function<Projection(const Matrix&, int)> solve;
};

// Runs the hook and validates its output is a genuine projection of the
// right shape; violations raise ContractError.
Projection constrained_pca(const SpectralHistogram& h, int k,
                           const SolverHook& hook);

SolverHook svd_hook();     // exact rank-k SVD, gamma = 1
SolverHook sparse_hook();  // k coordinates with largest diagonal mass
SolverHook nonneg_hook();  // clamped power iteration, k = 1 only

struct RegressionAnswer {
  Matrix X;                // (d - p) x p coefficient matrix
  double objective = 0.0;  // tr(X^T S_AA X - 2 X^T S_AB + S_BB)
};

// Least squares from the summary of a stacked (a | b) stream whose last p
// columns are the responses. Requires wishart or exact mode.
RegressionAnswer regress(const SpectralHistogram& h, int p);

// x^T C x for unit x (checked within 1e-8).
double directional_variance(const Matrix& C, const Vector& x);

// sqrt(max(0, e_S^T C e_S)) for a set S of 0-based coordinates.
double cut_query(const Matrix& C, const std::vector<int>& S);

// Fixed-budget directional-variance interface: a jl histogram sized with
// r = ceil(log2 q) + 1 whose summary C = A~^T A~ answers at most q
// queries; the (q+1)-th raises BudgetError.
class BoundedVarianceQuerier {
 public:
  BoundedVarianceQuerier(int d, std::uint64_t W, double eta,
                         const PrivacyBudget& budget, int q,
                         std::uint64_t seed);

  void ingest(const Vector& a);
  Matrix summary_c() const;
  double query(const Vector& x);
  int budget_total() const { return q_; }
  int budget_used() const { return used_; }
  const SpectralHistogram& histogram() const { return h_; }

 private:
  SpectralHistogram h_;
  int q_;
  int used_ = 0;
};

// r = ceil(log2 q) + 1.
int variance_rank_param(int q);

}  // namespace dpmat
