#pragma once

// Deterministic random source. One user seed fans out into independent
// labelled streams ("phi", "row", ...), each an xoshiro256++ generator.
// std::normal_distribution is implementation-defined, so gaussians come
// from an explicit Box-Muller transform whose spare value is part of the
// serialized state. Identical seed, label and call sequence reproduce the
// identical bit stream on a given build.

#include <cstdint>
#include <string>
#include <string_view>

#include "dpmat/serialize.hpp"

namespace dpmat {

std::uint64_t fnv1a64(std::string_view s);

class Rng {
 public:
  Rng(std::uint64_t seed, std::string label);

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double uniform01();
  // Standard normal.
  double gaussian();
  double gaussian(double stddev) { return stddev * gaussian(); }

  std::uint64_t seed() const { return seed_; }
  const std::string& label() const { return label_; }

  void serialize(ByteWriter& w) const;
  static Rng deserialize(ByteReader& r);

  bool operator==(const Rng& other) const;

 private:
  Rng() = default;

  std::uint64_t s_[4] = {0, 0, 0, 0};
  bool has_spare_ = false;
  double spare_ = 0.0;
  std::uint64_t seed_ = 0;
  std::string label_;
};

}  // namespace dpmat
