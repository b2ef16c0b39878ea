#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dlmd {

/// Stream purposes. Each independent source of randomness in a simulation
/// draws from its own substream so results do not depend on iteration order.
enum class StreamTag : std::uint64_t {
  kQuantizer = 1,
  kChannel = 2,
  kOracle = 3,
  kDataset = 4,
  kReplication = 5,
  kNoiseStudy = 6,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives a substream seed from a master seed and a sequence of counters.
/// The mapping is a pure function of its inputs.
inline std::uint64_t derive_seed(std::uint64_t master, StreamTag tag,
                                 std::initializer_list<std::uint64_t> ids = {}) {
  std::uint64_t h = mix64(master ^ mix64(static_cast<std::uint64_t>(tag)));
  for (std::uint64_t id : ids) h = mix64(h ^ mix64(id + 0x632be59bd9b4e019ULL));
  return h;
}

/// A seeded random stream owned by exactly one logical consumer.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0) : engine_(seed) {}
  RandomStream(std::uint64_t master, StreamTag tag,
               std::initializer_list<std::uint64_t> ids = {})
      : engine_(derive_seed(master, tag, ids)) {}

  /// Uniform on [0, 1).
  double uniform() { return std::generate_canonical<double, 53>(engine_); }
  double normal() { return normal_(engine_); }
  std::uint64_t next_u64() { return engine_(); }
  /// Uniform integer in [0, bound).
  std::size_t index(std::size_t bound) {
    return std::uniform_int_distribution<std::size_t>(0, bound - 1)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace dlmd
