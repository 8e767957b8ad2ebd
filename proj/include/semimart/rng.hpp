#pragma once

#include <cstdint>
#include <random>

namespace semimart::rng {

using Engine = std::mt19937_64;

// Independent stochastic components of a simulation. Each one draws from its
// own engine so that switching a component off leaves the others unchanged.
enum class Stream : std::uint64_t {
  brownian = 1,
  jumps = 2,
  renewal = 3,
  pulses = 4,
  signal = 5,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed splitting rule: replication `index` of a run with `master` seed gets
// base seed splitmix64(master ^ splitmix64(index)), and stream s of that
// replication is seeded with splitmix64(base + s). The mapping is a pure
// function of (master, index, stream), so results do not depend on which
// worker runs which replication.
constexpr std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index));
}

constexpr std::uint64_t stream_seed(std::uint64_t base, Stream s) {
  return splitmix64(base + static_cast<std::uint64_t>(s));
}

class Streams {
 public:
  explicit Streams(std::uint64_t base_seed) : base_(base_seed) {}

  static Streams for_replication(std::uint64_t master, std::uint64_t index) {
    return Streams(replication_seed(master, index));
  }

  Engine engine(Stream s) const { return Engine(stream_seed(base_, s)); }
  std::uint64_t base_seed() const { return base_; }

 private:
  std::uint64_t base_;
};

}  // namespace semimart::rng
