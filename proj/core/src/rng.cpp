#include "parrep/rng.hpp"

#include "parrep/errors.hpp"

namespace parrep {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline std::uint64_t mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  return static_cast<std::uint64_t>(p);
}

} // namespace

std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> x,
                                        std::array<std::uint64_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    std::uint64_t hi0, hi1;
    const std::uint64_t lo0 = mulhilo(kMul0, x[0], hi0);
    const std::uint64_t lo1 = mulhilo(kMul1, x[2], hi1);
    x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
  }
  return x;
}

RngStream::RngStream(std::uint64_t seed, StreamId id)
    : key_{seed, (static_cast<std::uint64_t>(id.context) << 32) |
                     static_cast<std::uint64_t>(id.replica)},
      counter_{0, id.epoch, 0, 0} {}

void RngStream::refill() {
  block_ = philox4x64(counter_, key_);
  pos_ = 0;
  if (++counter_[0] == 0) ++counter_[2]; // block index carries past epoch word
}

std::uint64_t RngStream::next_u64() {
  if (pos_ == 4) refill();
  return block_[pos_++];
}

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw DomainError("RngStream::below: n must be positive");
  if (n == 1) return 0;
  std::uint64_t mask = n - 1;
  mask |= mask >> 1;
  mask |= mask >> 2;
  mask |= mask >> 4;
  mask |= mask >> 8;
  mask |= mask >> 16;
  mask |= mask >> 32;
  for (;;) {
    const std::uint64_t v = next_u64() & mask;
    if (v < n) return v;
  }
}

} // namespace parrep
