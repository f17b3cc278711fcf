#include "dpmat/mechanisms.hpp"

#include <cmath>
#include <string>

#include "dpmat/errors.hpp"

namespace dpmat {

PrivacyBudget make_budget(double epsilon, double delta) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InputError("budget: epsilon must be positive and finite");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InputError("budget: delta must lie in (0,1)");
  }
  return PrivacyBudget{epsilon, delta};
}

SketchConfig SketchConfig::make(int r, double eta) {
  if (r < 1) throw InputError("sketch: r must be >= 1");
  if (!(eta > 0.0 && eta <= 0.375)) {
    throw InputError("sketch: eta must lie in (0, 3/8]");
  }
  SketchConfig cfg;
  cfg.r = r;
  cfg.eta = eta;
  cfg.m = static_cast<int>(std::ceil(4.0 * r / eta));
  cfg.entry_variance = eta / (4.0 * r);
  return cfg;
}

double compute_sigma(int r, const PrivacyBudget& budget) {
  if (r < 1) throw InputError("compute_sigma: r must be >= 1");
  const double l = std::log(4.0 / budget.delta);
  return (16.0 * std::sqrt(r * l) + l) / budget.epsilon;
}

double jl_sigma_threshold(int r, const PrivacyBudget& budget) {
  if (r < 1) throw InputError("jl_sigma_threshold: r must be >= 1");
  const double l = std::log(4.0 / budget.delta);
  return (4.0 * std::sqrt(r * l) + l) / budget.epsilon;
}

long wishart_dof(int d, const PrivacyBudget& budget) {
  if (d < 1) throw InputError("wishart_dof: d must be >= 1");
  const double l = std::log(4.0 / budget.delta);
  const long tau = static_cast<long>(
      std::ceil(d + 28.0 * l / (budget.epsilon * budget.epsilon)));
  // The privacy term is strictly positive, so the ceiling exceeds d
  // mathematically; keep that true even when the term underflows the
  // ulp of d at enormous epsilon.
  return std::max(tau, static_cast<long>(d) + 1);
}

Matrix draw_shared_phi(const SketchConfig& cfg, int d, Rng& rng) {
  if (d < 1) throw InputError("draw_shared_phi: d must be >= 1");
  const double sd = std::sqrt(cfg.entry_variance);
  Matrix phi(cfg.m, d);
  for (int i = 0; i < cfg.m; ++i) {
    for (int j = 0; j < d; ++j) phi(i, j) = rng.gaussian(sd);
  }
  return phi;
}

Matrix draw_row_sketch(const Vector& a, const SketchConfig& cfg, Rng& rng) {
  if (!a.allFinite()) throw InputError("draw_row_sketch: non-finite row");
  const double norm = a.norm();
  if (norm > 1.0 + kNormSlack) {
    throw NormViolationError("row norm " + std::to_string(norm) +
                             " exceeds 1");
  }
  const double sd = std::sqrt(cfg.entry_variance);
  Vector g(cfg.m);
  for (int i = 0; i < cfg.m; ++i) g(i) = rng.gaussian(sd);
  return g * a.transpose();
}

Matrix wishart_sample(int d, long tau, Rng& rng) {
  if (d < 1) throw InputError("wishart_sample: d must be >= 1");
  if (tau < 1) throw InputError("wishart_sample: tau must be >= 1");
  Matrix G(tau, d);
  for (long i = 0; i < tau; ++i) {
    for (int j = 0; j < d; ++j) G(i, j) = rng.gaussian();
  }
  Matrix R = Matrix::Zero(d, d);
  R.selfadjointView<Eigen::Lower>().rankUpdate(G.transpose());
  R.triangularView<Eigen::StrictlyUpper>() = R.transpose();
  return R;
}

}  // namespace dpmat
