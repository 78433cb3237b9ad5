#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace transop {

struct SeedInfo {
  std::uint64_t master_seed = 9001;
  std::uint64_t stream_id = 0;
  bool operator==(const SeedInfo&) const = default;
};

inline constexpr std::uint64_t kDefaultMasterSeed = 9001;

/**
 * Philox4x32-10 counter-based generator.
 *
 * The key is the master seed and the upper half of the counter is the stream
 * id, so stream k of seed s is a pure function of (s, k, draw index). Any
 * number of streams can be consumed concurrently without coordination.
 */
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t master_seed, std::uint64_t stream_id)
      : key_{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)},
        stream_{static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)},
        seed_{master_seed, stream_id} {}

  explicit Stream(SeedInfo s) : Stream(s.master_seed, s.stream_id) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64() {
    if (pos_ == 2) refill();
    return buf_[pos_++];
  }

  // Uniform on the open interval (0,1); 53 random bits, never 0 or 1.
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  SeedInfo seed_info() const { return seed_; }
  std::uint64_t blocks_used() const { return counter_; }

  // Raw block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += W0;
      key[1] += W1;
    }
    return ctr;
  }

 private:
  void refill() {
    const auto out = philox({static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                             stream_[0], stream_[1]},
                            key_);
    ++counter_;
    buf_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buf_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    pos_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 2> stream_;
  SeedInfo seed_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buf_{};
  int pos_ = 2;
};

// Stream ids for auxiliary purposes live far above per-path ids.
inline constexpr std::uint64_t kAuxStreamBase = 0x8000'0000'0000'0000ull;

}  // namespace transop
