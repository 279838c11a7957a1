#pragma once

#include <array>
#include <cstdint>

#include "pdd/geometry.hpp"

namespace pdd {

/// Identifies one independent random stream under a master seed.
struct StreamKey {
  std::uint64_t node = 0;
  std::uint64_t replicate = 0;
  std::uint64_t particle = 0;

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

/// Philox4x32-10 block cipher (Salmon et al., SC'11). Maps a 128-bit counter
/// under a 64-bit key to 128 random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based random stream. The sequence is a pure function of
/// (master_seed, key): the key selects the cipher key and the upper counter
/// words, the lower counter word is the draw index. Copying a stream copies
/// its position.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, StreamKey key);

  std::uint64_t master_seed() const { return master_seed_; }
  const StreamKey& key() const { return key_; }

  /// Same seed and node, different replicate/particle.
  RngStream substream(std::uint64_t replicate, std::uint64_t particle) const {
    return RngStream(master_seed_, StreamKey{key_.node, replicate, particle});
  }

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  double gaussian();
  double exponential(double rate);
  /// Index in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  void refill();

  std::uint64_t master_seed_;
  StreamKey key_;
  std::array<std::uint32_t, 2> cipher_key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// dim i.i.d. N(0, dt) draws. Draws are consumed even when dt = 0 so the
/// stream position never depends on the step size.
Point sample_gaussian_increment(RngStream& stream, double dt, int dim);

}  // namespace pdd
