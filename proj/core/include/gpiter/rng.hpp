#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Dense>

namespace gpiter {

// Philox4x64-10 counter-based generator. Any draw is a pure function of
// (key, counter), which makes every random quantity in the toolkit
// reproducible from named integer seeds and lets independent streams be
// carved out without coordination.
std::array<std::uint64_t, 4> philox4x64(const std::array<std::uint64_t, 4>& counter,
                                        const std::array<std::uint64_t, 2>& key);

/// Identifies an independent random stream: (seed, stream, substream).
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t substream = 0)
      : key_{seed, stream_id}, counter_{0, substream, 0, 0} {}

  std::uint64_t next_u64();

  /// Uniform double in [0, 1), 53-bit resolution.
  double next_double();

  /// Standard normal via Box-Muller (pairs cached).
  double next_gaussian();

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t next_below(std::uint64_t bound);

  /// Fills in column-major order with i.i.d. standard normals.
  void fill_gaussian(Eigen::Ref<Eigen::MatrixXd> out);

  /// Fills in column-major order with i.i.d. Rademacher (+1/-1) entries.
  void fill_rademacher(Eigen::Ref<Eigen::MatrixXd> out);

  /// Uniformly random permutation of {0, ..., n-1} (Fisher-Yates).
  std::vector<int> permutation(int n);

  /// Uniform sample of k distinct indices from {0, ..., n-1}, ascending order.
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  void refill();

  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> counter_;
  std::array<std::uint64_t, 4> buffer_{};
  int buffer_pos_ = 4;
  double cached_gaussian_ = 0.0;
  bool has_cached_gaussian_ = false;
};

// Stream ids for the independent randomness sources. Held in one place so
// ablations can vary one source while holding the others fixed.
namespace streams {
inline constexpr std::uint64_t kSplit = 1;
inline constexpr std::uint64_t kProbes = 2;
inline constexpr std::uint64_t kFrequencies = 3;
inline constexpr std::uint64_t kWeights = 4;
inline constexpr std::uint64_t kNoiseDraws = 5;
inline constexpr std::uint64_t kSolver = 6;
inline constexpr std::uint64_t kSynthetic = 7;
inline constexpr std::uint64_t kPriorSample = 8;
inline constexpr std::uint64_t kCentroids = 9;
}  // namespace streams

}  // namespace gpiter
