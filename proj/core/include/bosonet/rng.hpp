#pragma once

#include <cstdint>
#include <random>

namespace bosonet {

// Thin wrapper over mt19937_64 with a fixed uniform-double recipe, so draws are
// identical across standard libraries (std::uniform_real_distribution is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Seed for stream `index` derived from a master seed. Streams are independent
// of how work is scheduled, so parallel runs reproduce serial ones.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace bosonet
