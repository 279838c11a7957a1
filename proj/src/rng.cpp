#include "pdd/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace pdd {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

RngStream::RngStream(std::uint64_t master_seed, StreamKey key) : master_seed_(master_seed), key_(key) {
  require(key.replicate <= std::numeric_limits<std::uint32_t>::max(), ErrorKind::InvalidArgument,
          "replicate id exceeds 32 bits");
  // Seed and node select the cipher key; replicate and particle occupy the
  // upper counter words; word 0 is the block index.
  const std::uint64_t k = splitmix64(master_seed ^ splitmix64(key.node));
  cipher_key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  counter_ = {0u, static_cast<std::uint32_t>(key.replicate), static_cast<std::uint32_t>(key.particle),
              static_cast<std::uint32_t>(key.particle >> 32)};
}

void RngStream::refill() {
  block_ = philox4x32(counter_, cipher_key_);
  ++counter_[0];
  used_ = 0;
}

std::uint32_t RngStream::next_u32() {
  if (used_ == 4) refill();
  return block_[static_cast<std::size_t>(used_++)];
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t hi = next_u32();
  return (hi << 32) | next_u32();
}

double RngStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

double RngStream::exponential(double rate) {
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(uniform()) / rate;
}

std::uint64_t RngStream::below(std::uint64_t n) {
  require(n > 0, ErrorKind::InvalidArgument, "below(0)");
  // Lemire's multiply-shift with rejection of the biased low region.
  const std::uint64_t threshold = (0 - n) % n;
  while (true) {
    const std::uint64_t x = next_u64();
    const unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
    if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
  }
}

Point sample_gaussian_increment(RngStream& stream, double dt, int dim) {
  require(dt >= 0.0, ErrorKind::InvalidArgument, "negative time step");
  require(dim >= 1 && dim <= kMaxDim, ErrorKind::InvalidArgument, "dimension out of range");
  const double scale = std::sqrt(dt);
  Point dw(dim);
  for (int i = 0; i < dim; ++i) dw[i] = scale * stream.gaussian();
  return dw;
}

}  // namespace pdd
