#pragma once

// Binary-tree mechanism for releasing a private windowed covariance at
// every time step. Dyadic blocks of the stream are privatized once, when
// they complete; a window query sums O(log W) finalized blocks. The
// privacy budget splits evenly across the log2(W)+1 levels, so each node
// carries Wishart noise calibrated to (eps/L, delta/L).

#include <cstdint>
#include <map>
#include <vector>

#include "dpmat/histogram.hpp"
#include "dpmat/linalg.hpp"
#include "dpmat/mechanisms.hpp"
#include "dpmat/rng.hpp"

namespace dpmat {

struct TreeConfig {
  std::uint64_t W = 0;
  int d = 0;
  PrivacyBudget budget{1.0, 1e-6};
  std::uint64_t seed = 0;
  // Replaces every noise draw with zero; used by oracle-equality tests.
  bool noiseless = false;
  NormPolicy norm_policy = NormPolicy::reject;
};

// Dyadic block: level v spans 2^v rows, index k covers stream positions
// [k*2^v + 1, (k+1)*2^v] (1-based, inclusive).
struct TreeNode {
  int level = 0;
  std::uint64_t index = 0;
  std::uint64_t lo() const { return index * (1ULL << level) + 1; }
  std::uint64_t hi() const { return (index + 1) * (1ULL << level); }
  auto operator<=>(const TreeNode&) const = default;
};

class DyadicTree {
 public:
  static DyadicTree make(const TreeConfig& cfg);

  void tree_ingest(const Vector& a);

  // Noisy covariance of [max(1, now-W+1), now]; throws StateError when
  // the stream is empty.
  Matrix tree_query() const;

  // The dyadic cover the current query would sum, for bound tests.
  std::vector<TreeNode> query_cover() const;

  // Finalized (privatized) nodes currently retained.
  std::vector<TreeNode> live_nodes() const;

  std::uint64_t now() const { return now_; }
  const TreeConfig& config() const { return cfg_; }
  int levels() const { return L_; }
  std::uint64_t padded_window() const { return Wp_; }
  long level_tau() const { return tau_; }
  std::size_t node_count() const { return nodes_.size(); }

  std::vector<std::uint8_t> snapshot() const;
  static DyadicTree restore(const std::vector<std::uint8_t>& bytes);

 private:
  DyadicTree() = default;

  void expire();

  TreeConfig cfg_;
  std::uint64_t Wp_ = 0;  // W rounded up to a power of two
  int L_ = 0;             // log2(Wp) + 1 levels
  long tau_ = 0;          // Wishart dof per node at budget (eps/L, delta/L)
  std::uint64_t now_ = 0;
  std::map<TreeNode, Matrix> nodes_;
  // Exact partial sum of the still-incomplete block at each level; the
  // mechanism's internal pre-release state, never exposed.
  std::vector<Matrix> pending_;
  std::vector<Rng> level_rngs_;
};

}  // namespace dpmat
