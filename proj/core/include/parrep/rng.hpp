#pragma once

#include <array>
#include <cstdint>

namespace parrep {

/// Raw Philox4x64-10 block function (counter-based, bijective per key).
/// Matches the reference implementation bit for bit; see the known-answer
/// tests for frozen vectors.
std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key);

/// Role of a stream within the algorithm. Baked into the Philox key so that
/// streams minted for different purposes can never collide.
enum class StreamContext : std::uint32_t {
  kMainChain = 1, // serial chain evolution (decorrelation)
  kDephase = 2,   // dephasing walkers
  kParallel = 3,  // parallel-step replicas
  kIdealize = 4,  // endpoint replacement draws in idealized mode
  kInit = 5,      // initial-state draw from a distribution
  kTrialSeed = 6, // per-trial seed derivation in the harness
  kTest = 7,      // scratch streams in tests and validation
};

/// Identifies one logical stream: (context tag, replica index, epoch counter).
/// Distinct ids yield statistically independent streams; a stream is fully
/// determined by (seed, id).
struct StreamId {
  StreamContext context = StreamContext::kTest;
  std::uint32_t replica = 0;
  std::uint64_t epoch = 0;
};

/// Counter-based random stream. Key = (seed, context<<32 | replica),
/// counter = (block, epoch, 0, 0); each generated block serves four 64-bit
/// draws. Replaying the same (seed, id) replays the exact draw sequence,
/// independent of which thread runs it.
class RngStream {
public:
  RngStream() : RngStream(0, {}) {}
  RngStream(std::uint64_t seed, StreamId id);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Unbiased uniform draw from {0, ..., n-1} via masked rejection.
  std::uint64_t below(std::uint64_t n);

private:
  void refill();

  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> counter_;
  std::array<std::uint64_t, 4> block_{};
  int pos_ = 4; // next unread word in block_; 4 means exhausted
};

/// A (seed, epoch) pair from which related streams are minted. Each algorithm
/// phase gets a fresh epoch, then hands per-replica streams to its workers.
struct RngLineage {
  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;

  RngStream stream(StreamContext context, std::uint32_t replica = 0) const {
    return RngStream(seed, StreamId{context, replica, epoch});
  }
};

} // namespace parrep
