#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace nlsysid {

/// Seedable PRNG stream.
///
/// Streams are addressed by a master seed plus a path of integer labels
/// (realization index, trajectory index, purpose tag, ...). Each path is
/// hashed with SplitMix64 into the seed of an independent mt19937_64, so a
/// stream's contents never depend on which other streams were drawn first.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Stream for (master, path...). Equal inputs give identical streams.
  static Rng stream(std::uint64_t master, std::initializer_list<std::uint64_t> path);

  double normal();
  double uniform01();
  /// Uniform integer in [0, count).
  std::size_t index(std::size_t count);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// SplitMix64 finalizer; also used to derive child seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Purpose tags for stream paths.
namespace stream_tag {
inline constexpr std::uint64_t kSystem = 1;
inline constexpr std::uint64_t kInputs = 2;
inline constexpr std::uint64_t kSgd = 3;
inline constexpr std::uint64_t kTrajectory = 4;
inline constexpr std::uint64_t kCheck = 5;
}  // namespace stream_tag

}  // namespace nlsysid
