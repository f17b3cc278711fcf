#include "dpmat/continual.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "dpmat/errors.hpp"
#include "dpmat/log.hpp"
#include "dpmat/serialize.hpp"

namespace dpmat {
namespace {

constexpr char kMagic[4] = {'S', 'P', 'H', 'G'};
constexpr std::uint16_t kVersion = 1;

std::uint64_t next_pow2(std::uint64_t w) {
  std::uint64_t p = 1;
  while (p < w) p <<= 1;
  return p;
}

void write_matrix(ByteWriter& w, const Matrix& M) {
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) w.f64(M(i, j));
  }
}

Matrix read_matrix(ByteReader& r, Eigen::Index rows, Eigen::Index cols) {
  r.require(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) *
            8);
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = r.f64();
  }
  return M;
}

}  // namespace

DyadicTree DyadicTree::make(const TreeConfig& cfg) {
  if (cfg.W < 1) throw InputError("tree: W must be >= 1");
  if (cfg.d < 1) throw InputError("tree: d must be >= 1");
  DyadicTree t;
  t.cfg_ = cfg;
  t.cfg_.budget = make_budget(cfg.budget.epsilon, cfg.budget.delta);
  t.Wp_ = next_pow2(cfg.W);
  t.L_ = 1;
  for (std::uint64_t p = t.Wp_; p > 1; p >>= 1) ++t.L_;
  PrivacyBudget per_level{t.cfg_.budget.epsilon / t.L_,
                          t.cfg_.budget.delta / t.L_};
  t.tau_ = wishart_dof(cfg.d, per_level);
  t.pending_.assign(t.L_, Matrix::Zero(cfg.d, cfg.d));
  t.level_rngs_.reserve(t.L_);
  for (int v = 0; v < t.L_; ++v) {
    t.level_rngs_.emplace_back(cfg.seed, "tree-level-" + std::to_string(v));
  }
  return t;
}

void DyadicTree::tree_ingest(const Vector& a) {
  if (a.size() != cfg_.d) {
    throw InputError("tree_ingest: row has dimension " +
                     std::to_string(a.size()) + ", expected " +
                     std::to_string(cfg_.d));
  }
  if (!a.allFinite()) throw InputError("tree_ingest: non-finite row");
  Vector row = a;
  const double norm = row.norm();
  if (norm > 1.0 + kNormSlack) {
    if (cfg_.norm_policy == NormPolicy::reject) {
      throw NormViolationError("tree_ingest: row norm " +
                               std::to_string(norm) +
                               " exceeds 1 under reject policy");
    }
    row /= norm;
    log_warn("tree_ingest: clipped row of norm " + std::to_string(norm) +
             " to unit length");
  }

  now_ += 1;
  Matrix aat = row * row.transpose();
  for (int v = 0; v < L_; ++v) {
    pending_[v] += aat;
    const std::uint64_t span = 1ULL << v;
    if (now_ % span == 0) {
      TreeNode n{v, now_ / span - 1};
      Matrix payload = pending_[v];
      if (!cfg_.noiseless) {
        payload += wishart_sample(cfg_.d, tau_, level_rngs_[v]);
      }
      nodes_[n] = std::move(payload);
      pending_[v].setZero();
    }
  }
  expire();
}

void DyadicTree::expire() {
  // A node is dead once its range ends before every future window start,
  // i.e. hi <= now - W.
  for (auto it = nodes_.begin(); it != nodes_.end();) {
    if (it->first.hi() + cfg_.W <= now_) {
      it = nodes_.erase(it);
    } else {
      ++it;
    }
  }
}

std::vector<TreeNode> DyadicTree::query_cover() const {
  if (now_ == 0) throw StateError("tree_query: empty stream");
  const std::uint64_t hi = now_;
  const std::uint64_t lo = now_ >= cfg_.W ? now_ - cfg_.W + 1 : 1;
  std::vector<TreeNode> cover;
  std::uint64_t pos = lo;
  while (pos <= hi) {
    // Largest aligned block starting at pos that stays inside the window.
    int v = 0;
    for (int cand = L_ - 1; cand > 0; --cand) {
      const std::uint64_t span = 1ULL << cand;
      if ((pos - 1) % span == 0 && pos - 1 + span <= hi) {
        v = cand;
        break;
      }
    }
    cover.push_back(TreeNode{v, (pos - 1) >> v});
    pos += 1ULL << v;
  }
  return cover;
}

Matrix DyadicTree::tree_query() const {
  std::vector<TreeNode> cover = query_cover();
  Matrix sum = Matrix::Zero(cfg_.d, cfg_.d);
  for (const TreeNode& n : cover) {
    auto it = nodes_.find(n);
    if (it == nodes_.end()) {
      throw StateError("tree_query: missing node [" + std::to_string(n.lo()) +
                       "," + std::to_string(n.hi()) + "]");
    }
    sum += it->second;
  }
  return sum;
}

std::vector<TreeNode> DyadicTree::live_nodes() const {
  std::vector<TreeNode> out;
  out.reserve(nodes_.size());
  for (const auto& [n, payload] : nodes_) out.push_back(n);
  return out;
}

std::vector<std::uint8_t> DyadicTree::snapshot() const {
  ByteWriter w;
  w.bytes(kMagic, 4);
  w.u16(kVersion);
  w.u8(static_cast<std::uint8_t>(Mode::tree));
  w.u64(cfg_.W);
  w.u32(static_cast<std::uint32_t>(cfg_.d));
  w.u32(0);    // r: unused in tree mode
  w.f64(0.0);  // eta
  w.f64(0.0);  // beta
  w.f64(cfg_.budget.epsilon);
  w.f64(cfg_.budget.delta);
  w.f64(0.0);  // sigma
  w.u64(static_cast<std::uint64_t>(tau_));
  w.u64(now_);
  w.u32(static_cast<std::uint32_t>(nodes_.size()));
  // Checkpoint list reuses the shared container: t packs (level, index).
  for (const auto& [n, payload] : nodes_) {
    const std::uint64_t t =
        (static_cast<std::uint64_t>(n.level) << 56) | n.index;
    w.u64(t);
    write_matrix(w, payload);
  }
  // Tree trailer: noise flag, per-level pending sums and RNG states.
  w.u8(cfg_.noiseless ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(L_));
  for (const auto& m : pending_) write_matrix(w, m);
  for (const auto& rng : level_rngs_) rng.serialize(w);
  return w.take();
}

DyadicTree DyadicTree::restore(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  r.require(4);
  char magic[4];
  for (auto& c : magic) c = static_cast<char>(r.u8());
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw CorruptPayloadError("tree snapshot: bad magic");
  }
  const std::uint16_t version = r.u16();
  if (version != kVersion) {
    throw VersionMismatchError("tree snapshot: unsupported version " +
                               std::to_string(version));
  }
  if (r.u8() != static_cast<std::uint8_t>(Mode::tree)) {
    throw InputError("snapshot is not a tree container");
  }

  TreeConfig cfg;
  cfg.W = r.u64();
  cfg.d = static_cast<int>(r.u32());
  r.u32();  // r
  r.f64();  // eta
  r.f64();  // beta
  cfg.budget.epsilon = r.f64();
  cfg.budget.delta = r.f64();
  r.f64();  // sigma
  const std::uint64_t tau = r.u64();
  const std::uint64_t now = r.u64();
  const std::uint32_t count = r.u32();

  DyadicTree t;
  try {
    t = make(cfg);
  } catch (const InputError& e) {
    throw CorruptPayloadError(std::string("tree snapshot: invalid header: ") +
                              e.what());
  }
  if (static_cast<std::uint64_t>(t.tau_) != tau) {
    throw CorruptPayloadError("tree snapshot: noise parameters inconsistent");
  }
  t.now_ = now;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint64_t packed = r.u64();
    TreeNode n{static_cast<int>(packed >> 56),
               packed & ((1ULL << 56) - 1)};
    if (n.level >= t.L_ || n.hi() > now) {
      throw CorruptPayloadError("tree snapshot: node out of range");
    }
    t.nodes_[n] = read_matrix(r, cfg.d, cfg.d);
  }
  t.cfg_.noiseless = r.u8() != 0;
  // Noise parameters depend only on (d, budget, W), not the flag, so the
  // header check above stays valid.
  const std::uint32_t levels = r.u32();
  if (levels != static_cast<std::uint32_t>(t.L_)) {
    throw CorruptPayloadError("tree snapshot: level count mismatch");
  }
  for (int v = 0; v < t.L_; ++v) {
    t.pending_[v] = read_matrix(r, cfg.d, cfg.d);
  }
  t.level_rngs_.clear();
  for (int v = 0; v < t.L_; ++v) {
    t.level_rngs_.push_back(Rng::deserialize(r));
  }
  if (!r.done()) throw CorruptPayloadError("tree snapshot: trailing bytes");
  return t;
}

}  // namespace dpmat
