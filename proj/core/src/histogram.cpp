#include "dpmat/histogram.hpp"

#include <cmath>
#include <cstring>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "dpmat/errors.hpp"
#include "dpmat/log.hpp"
#include "dpmat/serialize.hpp"

namespace dpmat {
namespace {

constexpr char kMagic[4] = {'S', 'P', 'H', 'G'};
constexpr std::uint16_t kVersion = 1;

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

nlohmann::json matrix_json(const Matrix& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::jl: return "jl";
    case Mode::wishart: return "wishart";
    case Mode::exact: return "exact";
    case Mode::tree: return "tree";
  }
  return "?";
}

Mode mode_from_name(const std::string& name) {
  if (name == "jl") return Mode::jl;
  if (name == "wishart") return Mode::wishart;
  if (name == "exact") return Mode::exact;
  if (name == "tree") return Mode::tree;
  throw InputError("unknown mode: " + name);
}

SpectralHistogram SpectralHistogram::make(const HistogramConfig& cfg) {
  if (cfg.mode == Mode::tree) {
    throw InputError("tree mode lives in DyadicTree, not SpectralHistogram");
  }
  if (cfg.W < 1) throw InputError("histogram: W must be >= 1");
  if (cfg.d < 1) throw InputError("histogram: d must be >= 1");
  if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) {
    throw InputError("histogram: beta must lie in (0,1)");
  }
  SpectralHistogram h;
  h.cfg_ = cfg;
  h.cfg_.budget = make_budget(cfg.budget.epsilon, cfg.budget.delta);
  h.sketch_ = SketchConfig::make(cfg.r, cfg.eta);
  switch (cfg.mode) {
    case Mode::jl: {
      h.sigma_ = compute_sigma(cfg.r, h.cfg_.budget);
      Rng phi_rng(cfg.seed, "phi");
      h.phi_ = draw_shared_phi(h.sketch_, cfg.d, phi_rng);
      h.rng_ = Rng(cfg.seed, "row");
      break;
    }
    case Mode::wishart:
      h.tau_ = wishart_dof(cfg.d, h.cfg_.budget);
      h.rng_ = Rng(cfg.seed, "wishart");
      break;
    case Mode::exact:
      h.sigma_ = 0.0;
      h.rng_ = Rng(cfg.seed, "row");
      break;
    case Mode::tree:
      break;  // unreachable
  }
  return h;
}

const Matrix& SpectralHistogram::phi() const {
  if (cfg_.mode != Mode::jl) throw StateError("phi: only defined in jl mode");
  return phi_;
}

Matrix SpectralHistogram::cov_of(const Checkpoint& c) const {
  if (cfg_.mode != Mode::jl) return c.payload;
  Matrix S = Matrix::Zero(cfg_.d, cfg_.d);
  S.selfadjointView<Eigen::Lower>().rankUpdate(c.payload.transpose());
  S.triangularView<Eigen::StrictlyUpper>() = S.transpose();
  return S;
}

Matrix SpectralHistogram::cov(std::size_t i) const {
  if (i >= cps_.size()) throw InputError("cov: checkpoint index out of range");
  return cov_of(cps_[i]);
}

const Checkpoint& SpectralHistogram::checkpoint(std::size_t i) const {
  if (i >= cps_.size()) {
    throw InputError("checkpoint: index out of range");
  }
  return cps_[i];
}

std::vector<std::uint64_t> SpectralHistogram::timestamps() const {
  std::vector<std::uint64_t> ts;
  ts.reserve(cps_.size());
  for (const auto& c : cps_) ts.push_back(c.t);
  return ts;
}

Matrix SpectralHistogram::current_summary() const {
  if (cps_.empty()) throw StateError("current_summary: empty histogram");
  return cps_.front().payload;
}

std::size_t SpectralHistogram::checkpoint_bound() const {
  const double b =
      std::ceil(4.0 * cfg_.r / cfg_.eta * std::log(double(cfg_.W))) + 2.0;
  return static_cast<std::size_t>(b);
}

void SpectralHistogram::ingest(const Vector& a) {
  if (a.size() != cfg_.d) {
    throw InputError("ingest: row has dimension " + std::to_string(a.size()) +
                     ", expected " + std::to_string(cfg_.d));
  }
  if (!a.allFinite()) throw InputError("ingest: non-finite row");
  Vector row = a;
  const double norm = row.norm();
  if (norm > 1.0 + kNormSlack) {
    if (cfg_.norm_policy == NormPolicy::reject) {
      throw NormViolationError("ingest: row norm " + std::to_string(norm) +
                               " exceeds 1 under reject policy");
    }
    row /= norm;
    log_warn("ingest: clipped row of norm " + std::to_string(norm) +
             " to unit length");
  }

  now_ += 1;
  expire();

  switch (cfg_.mode) {
    case Mode::jl: {
      Matrix sk = draw_row_sketch(row, sketch_, rng_);
      for (auto& c : cps_) c.payload += sk;
      Checkpoint nc;
      nc.t = now_;
      nc.payload = sigma_ * phi_ + sk;
      cps_.push_back(std::move(nc));
      break;
    }
    case Mode::wishart: {
      Matrix noise = wishart_sample(cfg_.d, tau_, rng_);
      Matrix aat = row * row.transpose();
      for (auto& c : cps_) c.payload += aat;
      Checkpoint nc;
      nc.t = now_;
      nc.payload = aat + noise;
      cps_.push_back(std::move(nc));
      break;
    }
    case Mode::exact: {
      Matrix aat = row * row.transpose();
      for (auto& c : cps_) c.payload += aat;
      Checkpoint nc;
      nc.t = now_;
      nc.payload = std::move(aat);
      cps_.push_back(std::move(nc));
      break;
    }
    case Mode::tree:
      break;  // unreachable; make() rejects tree
  }

  if (cfg_.track_exact) {
    Matrix aat = row * row.transpose();
    for (std::size_t i = 0; i + 1 < cps_.size(); ++i) cps_[i].shadow += aat;
    cps_.back().shadow = aat;
  }

  if (cfg_.mode == Mode::wishart) enforce_psd_order();
  compact();
}

void SpectralHistogram::expire() {
  // Drop checkpoint 1 while checkpoint 2 still covers the whole window,
  // i.e. t2 <= now - W + 1. Dropping at equality keeps the sandwich
  // t1 <= now - W + 1 < t2 strict on the right.
  while (cps_.size() >= 2 && cps_[1].t + cfg_.W <= now_ + 1) {
    cps_.erase(cps_.begin());
  }
}

void SpectralHistogram::compact() {
  if (cps_.size() < 3) return;
  std::vector<Matrix> covs;
  covs.reserve(cps_.size());
  for (const auto& c : cps_) covs.push_back(cov_of(c));
  const double f = 1.0 - cfg_.eta / 2.0;
  // Delete the middle of any (i, i+1, i+2) whose outer pair is within a
  // (1 - eta/2) factor, and repeat until no such triple remains. A single
  // left-to-right pass matches the classic greedy on descending chains;
  // the outer loop guarantees the gap postcondition even when noise makes
  // the chain locally non-monotone.
  bool changed = true;
  while (changed) {
    changed = false;
    std::size_t i = 0;
    while (i + 2 < cps_.size()) {
      const Matrix scaled = f * covs[i];
      if (psd_dominates(scaled, covs[i + 2], loewner_tol(covs[i + 2]))) {
        cps_.erase(cps_.begin() + static_cast<std::ptrdiff_t>(i) + 1);
        covs.erase(covs.begin() + static_cast<std::ptrdiff_t>(i) + 1);
        changed = true;
      } else {
        ++i;
      }
    }
  }
}

void SpectralHistogram::enforce_psd_order() {
  if (cps_.size() < 2) return;
  const Matrix& latest = cps_.back().payload;
  std::size_t j = cps_.size() - 1;
  for (std::size_t p = 0; p + 1 < cps_.size(); ++p) {
    if (!psd_dominates(latest, cps_[p].payload,
                       loewner_tol(cps_[p].payload))) {
      j = p;
      break;
    }
  }
  if (j + 1 < cps_.size()) {
    // Checkpoints j..ell-2 no longer dominate the fresh one; replace the
    // first offender with it and drop the rest.
    Checkpoint nc = std::move(cps_.back());
    cps_.erase(cps_.begin() + static_cast<std::ptrdiff_t>(j), cps_.end());
    cps_.push_back(std::move(nc));
  }
}

SpectralHistogram::InvariantReport SpectralHistogram::check_invariants()
    const {
  InvariantReport rep;
  for (std::size_t i = 0; i < cps_.size(); ++i) {
    if (cps_[i].t < 1 || cps_[i].t > now_) rep.timestamps_ok = false;
    if (i > 0 && cps_[i - 1].t >= cps_[i].t) rep.timestamps_ok = false;
  }
  if (now_ >= cfg_.W && cps_.size() >= 2) {
    const std::uint64_t start = now_ - cfg_.W + 1;
    if (!(cps_[0].t <= start && start < cps_[1].t)) rep.sandwich_ok = false;
  }
  std::vector<Matrix> covs;
  covs.reserve(cps_.size());
  for (const auto& c : cps_) covs.push_back(cov_of(c));
  const double f = 1.0 - cfg_.eta / 2.0;
  for (std::size_t i = 0; i + 2 < covs.size(); ++i) {
    if (psd_dominates(f * covs[i], covs[i + 2], loewner_tol(covs[i + 2]))) {
      rep.gap_ok = false;
    }
  }
  for (std::size_t i = 0; i + 1 < covs.size(); ++i) {
    if (!psd_dominates(covs[i + 1], covs[i], loewner_tol(covs[i]))) {
      rep.chain_ok = false;
    }
  }
  rep.count_ok = cps_.size() <= checkpoint_bound();
  return rep;
}

std::vector<std::uint8_t> SpectralHistogram::snapshot() const {
  ByteWriter w;
  w.bytes(kMagic, 4);
  w.u16(kVersion);
  w.u8(static_cast<std::uint8_t>(cfg_.mode));
  w.u64(cfg_.W);
  w.u32(static_cast<std::uint32_t>(cfg_.d));
  w.u32(static_cast<std::uint32_t>(cfg_.r));
  w.f64(cfg_.eta);
  w.f64(cfg_.beta);
  w.f64(cfg_.budget.epsilon);
  w.f64(cfg_.budget.delta);
  w.f64(sigma_);
  w.u64(static_cast<std::uint64_t>(tau_));
  w.u64(now_);
  w.u32(static_cast<std::uint32_t>(cps_.size()));
  if (cfg_.mode == Mode::jl) write_matrix(w, phi_);
  for (const auto& c : cps_) {
    w.u64(c.t);
    write_matrix(w, c.payload);
  }
  rng_.serialize(w);
  return w.take();
}

SpectralHistogram SpectralHistogram::restore(
    const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  r.require(4);
  char magic[4];
  for (auto& c : magic) c = static_cast<char>(r.u8());
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw CorruptPayloadError("snapshot: bad magic");
  }
  const std::uint16_t version = r.u16();
  if (version != kVersion) {
    throw VersionMismatchError("snapshot: unsupported version " +
                               std::to_string(version));
  }
  const std::uint8_t mode_byte = r.u8();
  if (mode_byte == static_cast<std::uint8_t>(Mode::tree)) {
    throw InputError("snapshot: tree container, restore via DyadicTree");
  }
  if (mode_byte > static_cast<std::uint8_t>(Mode::exact)) {
    throw CorruptPayloadError("snapshot: unknown mode byte");
  }

  HistogramConfig cfg;
  cfg.mode = static_cast<Mode>(mode_byte);
  cfg.W = r.u64();
  cfg.d = static_cast<int>(r.u32());
  cfg.r = static_cast<int>(r.u32());
  cfg.eta = r.f64();
  cfg.beta = r.f64();
  const double eps = r.f64();
  const double delta = r.f64();
  const double sigma = r.f64();
  const std::uint64_t tau = r.u64();
  const std::uint64_t now = r.u64();
  const std::uint32_t ell = r.u32();
  cfg.budget.epsilon = eps;
  cfg.budget.delta = delta;

  SpectralHistogram h;
  try {
    h = make(cfg);
  } catch (const InputError& e) {
    throw CorruptPayloadError(std::string("snapshot: invalid header: ") +
                              e.what());
  }
  // Derived noise parameters must agree with the header.
  const double sigma_rel =
      std::abs(h.sigma_ - sigma) / std::max(1.0, std::abs(h.sigma_));
  if (sigma_rel > 1e-9 || static_cast<std::uint64_t>(h.tau_) != tau) {
    throw CorruptPayloadError("snapshot: noise parameters inconsistent");
  }

  if (cfg.mode == Mode::jl) {
    h.phi_ = read_matrix(r, h.sketch_.m, cfg.d);
  }
  h.now_ = now;
  const Eigen::Index prow = cfg.mode == Mode::jl ? h.sketch_.m : cfg.d;
  h.cps_.clear();
  for (std::uint32_t i = 0; i < ell; ++i) {
    Checkpoint c;
    c.t = r.u64();
    c.payload = read_matrix(r, prow, cfg.d);
    if (c.t < 1 || c.t > now ||
        (!h.cps_.empty() && h.cps_.back().t >= c.t)) {
      throw CorruptPayloadError("snapshot: timestamps not increasing");
    }
    h.cps_.push_back(std::move(c));
  }
  h.rng_ = Rng::deserialize(r);
  if (!r.done()) throw CorruptPayloadError("snapshot: trailing bytes");
  return h;
}

std::string SpectralHistogram::snapshot_json() const {
  nlohmann::ordered_json j;
  j["magic"] = "SPHG";
  j["version"] = kVersion;
  j["mode"] = mode_name(cfg_.mode);
  j["W"] = cfg_.W;
  j["d"] = cfg_.d;
  j["r"] = cfg_.r;
  j["eta"] = cfg_.eta;
  j["beta"] = cfg_.beta;
  j["epsilon"] = cfg_.budget.epsilon;
  j["delta"] = cfg_.budget.delta;
  j["sigma"] = sigma_;
  j["tau"] = tau_;
  j["now"] = now_;
  j["ell"] = cps_.size();
  if (cfg_.mode == Mode::jl) j["phi"] = matrix_json(phi_);
  nlohmann::ordered_json cps = nlohmann::ordered_json::array();
  for (const auto& c : cps_) {
    nlohmann::ordered_json cj;
    cj["t"] = c.t;
    cj["payload"] = matrix_json(c.payload);
    cps.push_back(std::move(cj));
  }
  j["checkpoints"] = std::move(cps);
  ByteWriter rw;
  rng_.serialize(rw);
  std::ostringstream hex;
  hex << std::hex << std::setfill('0');
  for (std::uint8_t b : rw.data()) hex << std::setw(2) << int(b);
  j["rng_state_hex"] = hex.str();
  return j.dump(2);
}

}  // namespace dpmat
