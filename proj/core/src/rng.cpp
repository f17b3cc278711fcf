#include "dpmat/rng.hpp"

#include <cmath>
#include <numbers>

namespace dpmat {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Rng::Rng(std::uint64_t seed, std::string label)
    : seed_(seed), label_(std::move(label)) {
  std::uint64_t sm = seed ^ fnv1a64(label_);
  for (auto& w : s_) w = splitmix64(sm);
  // xoshiro's all-zero state is absorbing; splitmix64 cannot emit four
  // zeros in a row, but guard anyway.
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform01() {
  // 53 random bits, shifted into (0, 1) strictly: safe as a log() argument.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

void Rng::serialize(ByteWriter& w) const {
  w.str(label_);
  w.u64(seed_);
  for (auto v : s_) w.u64(v);
  w.u8(has_spare_ ? 1 : 0);
  w.f64(spare_);
}

Rng Rng::deserialize(ByteReader& r) {
  Rng out;
  out.label_ = r.str();
  out.seed_ = r.u64();
  for (auto& v : out.s_) v = r.u64();
  out.has_spare_ = r.u8() != 0;
  out.spare_ = r.f64();
  return out;
}

bool Rng::operator==(const Rng& other) const {
  return s_[0] == other.s_[0] && s_[1] == other.s_[1] &&
         s_[2] == other.s_[2] && s_[3] == other.s_[3] &&
         has_spare_ == other.has_spare_ && spare_ == other.spare_ &&
         seed_ == other.seed_ && label_ == other.label_;
}

}  // namespace dpmat
