#include "gpiter/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace gpiter {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mul_hi_lo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
#if defined(__SIZEOF_INT128__)
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
#else
  const std::uint64_t a_lo = a & 0xFFFFFFFFULL, a_hi = a >> 32;
  const std::uint64_t b_lo = b & 0xFFFFFFFFULL, b_hi = b >> 32;
  const std::uint64_t t = a_lo * b_hi + ((a_lo * b_lo) >> 32);
  const std::uint64_t u = a_hi * b_lo + (t & 0xFFFFFFFFULL);
  hi = a_hi * b_hi + (t >> 32) + (u >> 32);
  lo = a * b;
#endif
}

}  // namespace

std::array<std::uint64_t, 4> philox4x64(const std::array<std::uint64_t, 4>& counter,
                                        const std::array<std::uint64_t, 2>& key) {
  std::array<std::uint64_t, 4> c = counter;
  std::array<std::uint64_t, 2> k = key;
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mul_hi_lo(kMul0, c[0], hi0, lo0);
    mul_hi_lo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

void RandomStream::refill() {
  buffer_ = philox4x64(counter_, key_);
  buffer_pos_ = 0;
  ++counter_[0];  // 64-bit block counter; practical streams never wrap
}

std::uint64_t RandomStream::next_u64() {
  if (buffer_pos_ >= 4) refill();
  return buffer_[buffer_pos_++];
}

double RandomStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::next_gaussian() {
  if (has_cached_gaussian_) {
    has_cached_gaussian_ = false;
    return cached_gaussian_;
  }
  // u1 in (0, 1] so the log is finite.
  const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  const double u2 = next_double();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_gaussian_ = radius * std::sin(angle);
  has_cached_gaussian_ = true;
  return radius * std::cos(angle);
}

std::uint64_t RandomStream::next_below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("next_below: bound must be positive");
  // Plain modulo: bias is < bound / 2^64, irrelevant at the sizes used here,
  // and the integer semantics are portable.
  return next_u64() % bound;
}

void RandomStream::fill_gaussian(Eigen::Ref<Eigen::MatrixXd> out) {
  double* data = out.data();
  const Eigen::Index size = out.size();
  for (Eigen::Index i = 0; i < size; ++i) data[i] = next_gaussian();
}

void RandomStream::fill_rademacher(Eigen::Ref<Eigen::MatrixXd> out) {
  double* data = out.data();
  const Eigen::Index size = out.size();
  for (Eigen::Index i = 0; i < size; ++i) data[i] = (next_u64() & 1u) ? 1.0 : -1.0;
}

std::vector<int> RandomStream::permutation(int n) {
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(next_below(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

std::vector<int> RandomStream::sample_without_replacement(int n, int k) {
  if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
  // Floyd's algorithm; result sorted for cache-friendly row gathers.
  std::vector<int> chosen;
  chosen.reserve(k);
  std::vector<bool> taken(n, false);
  for (int j = n - k; j < n; ++j) {
    const int t = static_cast<int>(next_below(static_cast<std::uint64_t>(j) + 1));
    if (taken[t]) {
      chosen.push_back(j);
      taken[j] = true;
    } else {
      chosen.push_back(t);
      taken[t] = true;
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace gpiter
