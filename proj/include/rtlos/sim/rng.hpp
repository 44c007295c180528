#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace rtlos::sim {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256** generator. 32 bytes of state, so whole-facility snapshots stay
// cheap to copy (the oracle clones a facility for every assignment decision).
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed = 0) {
    for (auto& word : state_) word = splitmix64(seed);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  bool operator==(const Xoshiro256&) const = default;

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> state_{};
};

enum class StreamKind : std::uint8_t { Arrival, Service, Routing, Compliance, Oracle };

// Identifies one named substream. `facility` is the owning facility index and
// `index` the patient class (arrivals) or station (service).
struct StreamKey {
  StreamKind kind = StreamKind::Arrival;
  std::uint16_t facility = 0;
  std::uint16_t index = 0;

  bool operator==(const StreamKey&) const = default;
};

inline std::uint64_t derive_seed(std::uint64_t master, StreamKey key) {
  std::uint64_t state = master;
  std::uint64_t mixed = splitmix64(state);
  std::uint64_t tag = (static_cast<std::uint64_t>(key.kind) << 32) |
                      (static_cast<std::uint64_t>(key.facility) << 16) | key.index;
  state = mixed ^ (tag * 0xd1342543de82ef95ULL);
  return splitmix64(state);
}

// Registry of independent substreams derived from one master seed. Streams are
// created lazily; a stream's sequence depends only on (master, key), so the
// order in which streams are first touched or drawn from never matters.
class RngStreams {
 public:
  explicit RngStreams(std::uint64_t master = 0) : master_(master) {}

  Xoshiro256& stream(StreamKey key) {
    for (auto& [k, engine] : streams_)
      if (k == key) return engine;
    streams_.emplace_back(key, Xoshiro256(derive_seed(master_, key)));
    return streams_.back().second;
  }

  std::uint64_t master_seed() const { return master_; }

 private:
  std::uint64_t master_;
  std::vector<std::pair<StreamKey, Xoshiro256>> streams_;
};

}  // namespace rtlos::sim
