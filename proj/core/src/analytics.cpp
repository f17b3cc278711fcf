#include "dpmat/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "dpmat/errors.hpp"
#include "dpmat/log.hpp"

namespace dpmat {

SpectralAnswer spectral_approx(const SpectralHistogram& h, bool clip) {
  const int d = h.config().d;
  Matrix C = h.cov(0);
  SpectralAnswer out;
  out.sigma_shift = 0.0;
  if (h.config().mode == Mode::jl) {
    out.sigma_shift = h.sigma() * h.sigma();
    C -= out.sigma_shift * Matrix::Identity(d, d);
  }
  if (clip) {
    C = clip_psd(C);
    out.clipped = true;
  }
  out.C = std::move(C);
  return out;
}

Matrix summary_factor(const SpectralHistogram& h) {
  if (h.config().mode == Mode::jl) return h.current_summary();
  return sym_psd_sqrt(h.current_summary());
}

int pca_rank_param(int k, double eta, double beta) {
  if (k < 1) throw InputError("pca_rank_param: k must be >= 1");
  if (!(eta > 0.0)) throw InputError("pca_rank_param: eta must be positive");
  if (!(beta > 0.0 && beta < 1.0)) {
    throw InputError("pca_rank_param: beta must lie in (0,1)");
  }
  return static_cast<int>(std::ceil((k + std::log(1.0 / beta)) / eta));
}

Projection pca(const SpectralHistogram& h, int k) {
  const int d = h.config().d;
  if (k < 1 || k > d) throw InputError("pca: k out of range");
  const int want = pca_rank_param(k, h.config().eta, h.config().beta);
  if (h.config().r != want) {
    log_warn("pca: histogram rank parameter " +
             std::to_string(h.config().r) + " differs from expected " +
             std::to_string(want) + " for k=" + std::to_string(k));
  }
  Matrix Vk = top_k_right_subspace(summary_factor(h), k);
  Projection p;
  p.dim = d;
  p.rank = k;
  p.P = Vk * Vk.transpose();
  p.P = ((p.P + p.P.transpose()) * 0.5).eval();
  return p;
}

Projection constrained_pca(const SpectralHistogram& h, int k,
                           const SolverHook& hook) {
  const int d = h.config().d;
  if (k < 1 || k > d) throw InputError("constrained_pca: k out of range");
  if (!hook.solve) throw InputError("constrained_pca: empty solver hook");
  Projection p = hook.solve(summary_factor(h), k);
  if (p.dim != d || p.rank != k || !validate_projection(p)) {
    throw ContractError("constrained_pca: solver '" + hook.name +
                        "' returned an invalid projection");
  }
  return p;
}

SolverHook svd_hook() {
  SolverHook hook;
  hook.name = "svd";
  hook.gamma = 1.0;
  hook.solve = [](const Matrix& factor, int k) {
    Matrix Vk = top_k_right_subspace(factor, k);
    Projection p;
    p.dim = static_cast<int>(factor.cols());
    p.rank = k;
    p.P = Vk * Vk.transpose();
    p.P = ((p.P + p.P.transpose()) * 0.5).eval();
    return p;
  };
  return hook;
}

SolverHook sparse_hook() {
  SolverHook hook;
  hook.name = "sparse";
  // Coordinate heuristic: no finite worst-case factor; tests use the
  // factor measured on the sketch instead.
  hook.gamma = std::numeric_limits<double>::infinity();
  hook.solve = [](const Matrix& factor, int k) {
    const int d = static_cast<int>(factor.cols());
    Vector diag = factor.colwise().squaredNorm().transpose();
    std::vector<int> idx(d);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return diag(a) > diag(b); });
    Projection p;
    p.dim = d;
    p.rank = k;
    p.P = Matrix::Zero(d, d);
    for (int i = 0; i < k; ++i) p.P(idx[i], idx[i]) = 1.0;
    return p;
  };
  return hook;
}

SolverHook nonneg_hook() {
  SolverHook hook;
  hook.name = "nonneg";
  hook.gamma = std::numeric_limits<double>::infinity();
  hook.solve = [](const Matrix& factor, int k) {
    if (k != 1) {
      throw InputError("nonneg solver supports k = 1 only");
    }
    const int d = static_cast<int>(factor.cols());
    Matrix C = Matrix::Zero(d, d);
    C.selfadjointView<Eigen::Lower>().rankUpdate(factor.transpose());
    C.triangularView<Eigen::StrictlyUpper>() = C.transpose();
    Vector x = Vector::Constant(d, 1.0 / std::sqrt(double(d)));
    for (int it = 0; it < 500; ++it) {
      Vector y = (C * x).cwiseMax(0.0);
      const double n = y.norm();
      if (n < 1e-280) {
        // Stream has no mass along the nonnegative orthant start; fall
        // back to the heaviest coordinate.
        int best = 0;
        C.diagonal().maxCoeff(&best);
        x = Vector::Zero(d);
        x(best) = 1.0;
        break;
      }
      y /= n;
      const double delta = (y - x).norm();
      x = y;
      if (delta < 1e-13) break;
    }
    Projection p;
    p.dim = d;
    p.rank = 1;
    p.P = x * x.transpose();
    p.P = ((p.P + p.P.transpose()) * 0.5).eval();
    return p;
  };
  return hook;
}

RegressionAnswer regress(const SpectralHistogram& h, int p) {
  const Mode mode = h.config().mode;
  if (mode != Mode::wishart && mode != Mode::exact) {
    throw InputError("regress: requires wishart or exact mode");
  }
  const int d = h.config().d;
  if (p < 1 || p >= d) throw InputError("regress: p out of range");
  if (h.checkpoint_count() == 0) throw StateError("regress: empty histogram");
  const int da = d - p;
  Matrix S = h.cov(0);
  Matrix Saa = S.topLeftCorner(da, da);
  Matrix Sab = S.topRightCorner(da, p);
  Matrix Sbb = S.bottomRightCorner(p, p);
  RegressionAnswer ans;
  ans.X = pinv(Saa) * Sab;
  ans.objective = (ans.X.transpose() * Saa * ans.X).trace() -
                  2.0 * (ans.X.transpose() * Sab).trace() + Sbb.trace();
  return ans;
}

double directional_variance(const Matrix& C, const Vector& x) {
  require_symmetric(C, "directional_variance");
  if (x.size() != C.rows()) {
    throw InputError("directional_variance: dimension mismatch");
  }
  if (std::abs(x.norm() - 1.0) > 1e-8) {
    throw InputError("directional_variance: x must be a unit vector");
  }
  return x.dot(C * x);
}

double cut_query(const Matrix& C, const std::vector<int>& S) {
  require_symmetric(C, "cut_query");
  if (S.empty()) throw InputError("cut_query: empty index set");
  const int d = static_cast<int>(C.rows());
  std::set<int> uniq;
  for (int i : S) {
    if (i < 0 || i >= d) {
      throw InputError("cut_query: index " + std::to_string(i) +
                       " out of range for d=" + std::to_string(d));
    }
    uniq.insert(i);
  }
  Vector e = Vector::Zero(d);
  for (int i : uniq) e(i) = 1.0;
  return std::sqrt(std::max(0.0, e.dot(C * e)));
}

int variance_rank_param(int q) {
  if (q < 1) throw InputError("variance_rank_param: q must be >= 1");
  int bits = 0;
  while ((1LL << bits) < q) ++bits;  // bits = ceil(log2 q)
  return bits + 1;
}

BoundedVarianceQuerier::BoundedVarianceQuerier(int d, std::uint64_t W,
                                               double eta,
                                               const PrivacyBudget& budget,
                                               int q, std::uint64_t seed)
    : h_(SpectralHistogram::make([&] {
        HistogramConfig cfg;
        cfg.mode = Mode::jl;
        cfg.W = W;
        cfg.eta = eta;
        cfg.r = variance_rank_param(q);
        cfg.d = d;
        cfg.budget = budget;
        cfg.seed = seed;
        return cfg;
      }())),
      q_(q) {}

void BoundedVarianceQuerier::ingest(const Vector& a) { h_.ingest(a); }

Matrix BoundedVarianceQuerier::summary_c() const {
  if (h_.checkpoint_count() == 0) {
    throw StateError("bounded variance: empty histogram");
  }
  return h_.cov(0);
}

double BoundedVarianceQuerier::query(const Vector& x) {
  if (used_ >= q_) {
    throw BudgetError("bounded variance: budget of " + std::to_string(q_) +
                      " queries exhausted");
  }
  const double v = directional_variance(summary_c(), x);
  ++used_;
  return v;
}

}  // namespace dpmat
