#pragma once

// Privacy noise primitives: the regularized JL sketch mechanism and the
// additive Wishart mechanism, plus budget arithmetic. "log" in every
// noise formula is the natural logarithm.

#include <cstdint>

#include "dpmat/linalg.hpp"
#include "dpmat/rng.hpp"

namespace dpmat {

struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;
};

// Validates epsilon > 0, 0 < delta < 1.
PrivacyBudget make_budget(double epsilon, double delta);

struct SketchConfig {
  int r = 0;                  // target rank
  double eta = 0.0;           // accuracy, in (0, 3/8]
  int m = 0;                  // sketch rows, ceil(4r/eta)
  double entry_variance = 0;  // eta/(4r)

  static SketchConfig make(int r, double eta);
};

// sigma = (16*sqrt(r*ln(4/delta)) + ln(4/delta)) / epsilon.
double compute_sigma(int r, const PrivacyBudget& budget);

// Threshold the noise multiplier must clear for the JL mechanism to be
// private: w = (4*sqrt(r*ln(4/delta)) + ln(4/delta)) / epsilon.
double jl_sigma_threshold(int r, const PrivacyBudget& budget);

// tau = ceil(d + 28*ln(4/delta)/epsilon^2).
long wishart_dof(int d, const PrivacyBudget& budget);

// m x d matrix of i.i.d. N(0, eta/(4r)) entries, drawn row-major.
Matrix draw_shared_phi(const SketchConfig& cfg, int d, Rng& rng);

// Outer product g * a^T with g in R^m i.i.d. N(0, eta/(4r)). The scale
// matches phi so the concatenated sketch is an unbiased subspace
// embedding. Rejects rows with ||a|| > 1 (callers clip beforehand when
// their policy allows it).
Matrix draw_row_sketch(const Vector& a, const SketchConfig& cfg, Rng& rng);

// R = G^T G with G tau x d of i.i.d. standard gaussians, drawn row-major.
// Exactly symmetric and PSD by construction.
Matrix wishart_sample(int d, long tau, Rng& rng);

// Slack allowed on the unit norm bound before a row counts as a
// violation; absorbs rounding in upstream normalization.
inline constexpr double kNormSlack = 1e-9;

}  // namespace dpmat
