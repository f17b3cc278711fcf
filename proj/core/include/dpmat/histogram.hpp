#pragma once

// Checkpointed sliding-window summary of a row stream. An ordered list of
// timestamps t_1 < ... < t_ell, each carrying a privatized summary of the
// rows from t_i to the present. Three payload modes:
//   jl:      m x d Gaussian sketch sigma*Phi + sum of g_s * a_s^T
//   wishart: d x d noisy covariance sum a_s a_s^T + Wishart draw
//   exact:   d x d exact covariance (non-private reference configuration)
// After every ingest the list is compacted so consecutive-but-one
// covariances keep a (1 - eta/2) spectral gap, which bounds the list
// length by O((r/eta) log W) while the oldest checkpoint still covers the
// whole window.

#include <cstdint>
#include <string>
#include <vector>

#include "dpmat/linalg.hpp"
#include "dpmat/mechanisms.hpp"
#include "dpmat/rng.hpp"

namespace dpmat {

enum class Mode : std::uint8_t { jl = 0, wishart = 1, exact = 2, tree = 3 };

const char* mode_name(Mode m);
Mode mode_from_name(const std::string& name);

enum class NormPolicy : std::uint8_t { reject = 0, clip = 1 };

struct Checkpoint {
  std::uint64_t t = 0;  // 1-based stream position
  Matrix payload;       // m x d (jl) or d x d (wishart/exact)
  Matrix shadow;        // exact covariance from t to now; only when tracked
};

struct HistogramConfig {
  Mode mode = Mode::exact;
  std::uint64_t W = 0;
  double eta = 0.0;
  int r = 0;
  int d = 0;
  double beta = 0.1;
  PrivacyBudget budget{1.0, 1e-6};
  std::uint64_t seed = 0;
  NormPolicy norm_policy = NormPolicy::reject;
  // Keep exact per-checkpoint covariances alongside the payloads. Test
  // builds only; never persisted.
  bool track_exact = false;
};

class SpectralHistogram {
 public:
  static SpectralHistogram make(const HistogramConfig& cfg);

  void ingest(const Vector& a);

  // Copy of checkpoint 1's payload; throws StateError when empty.
  Matrix current_summary() const;

  // Covariance view of checkpoint i (0-based): payload^T payload in jl
  // mode, the payload itself otherwise.
  Matrix cov(std::size_t i) const;

  std::size_t checkpoint_count() const { return cps_.size(); }
  std::vector<std::uint64_t> timestamps() const;
  const Checkpoint& checkpoint(std::size_t i) const;
  std::uint64_t now() const { return now_; }

  const HistogramConfig& config() const { return cfg_; }
  const SketchConfig& sketch() const { return sketch_; }
  double sigma() const { return sigma_; }
  long tau() const { return tau_; }
  const Matrix& phi() const;

  void set_norm_policy(NormPolicy p) { cfg_.norm_policy = p; }

  // Empirical checkpoint-count bound: ceil((4r/eta) ln W) + 2.
  std::size_t checkpoint_bound() const;

  std::vector<std::uint8_t> snapshot() const;
  static SpectralHistogram restore(const std::vector<std::uint8_t>& bytes);
  // Debugging mirror of the snapshot with identical fields.
  std::string snapshot_json() const;

  // Structural self-checks used by tests and the bench report. Each flag
  // is evaluated independently; callers assert the subset their mode
  // guarantees.
  struct InvariantReport {
    bool timestamps_ok = true;   // strictly increasing, all <= now
    bool sandwich_ok = true;     // t1 <= now-W+1 < t2 when now >= W, ell >= 2
    bool gap_ok = true;          // (1-eta/2) cov(i) not<= cov(i+2)
    bool chain_ok = true;        // cov(i) >= cov(i+1)
    bool count_ok = true;        // ell within checkpoint_bound()
    bool all(bool include_chain) const {
      return timestamps_ok && sandwich_ok && gap_ok && count_ok &&
             (!include_chain || chain_ok);
    }
  };
  InvariantReport check_invariants() const;

 private:
  friend struct HistogramTestPeer;

  SpectralHistogram() = default;

  void expire();
  void compact();
  void enforce_psd_order();
  Matrix cov_of(const Checkpoint& c) const;

  HistogramConfig cfg_;
  SketchConfig sketch_;
  double sigma_ = 0.0;
  long tau_ = 0;
  Matrix phi_;  // jl mode only
  std::vector<Checkpoint> cps_;
  std::uint64_t now_ = 0;
  Rng rng_{0, "row"};
};

}  // namespace dpmat
