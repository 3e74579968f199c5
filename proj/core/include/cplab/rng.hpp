#pragma once
// Splittable counter-based random streams.
//
// A stream is addressed by a 64-bit (seed, stream) pair. Stream ids are
// derived by hash-chaining structured words (replica index, entity id, retry
// counter, ...), so per-entity Poisson clocks can be regenerated in any order
// and always produce the same bits. The generator is the splitmix64 sequence:
// the state walks an arithmetic progression with the golden-ratio increment
// and each output applies the avalanche finalizer, i.e. output #i is a pure
// function of (seed, stream, i).

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace cplab {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_stream(std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = 0x8f1bbcdcbfa53e0bull;
  for (std::uint64_t w : words) h = mix64(h + kGolden + w);
  return h;
}

struct RngKey {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  constexpr RngKey child(std::initializer_list<std::uint64_t> words) const noexcept {
    std::uint64_t h = stream;
    for (std::uint64_t w : words) h = mix64(h + kGolden + w);
    return RngKey{seed, h};
  }
  friend constexpr bool operator==(const RngKey&, const RngKey&) = default;
};

// Per-replica master key: replica r of a run seeded with s.
constexpr RngKey replica_key(std::uint64_t seed, std::uint64_t replica) noexcept {
  return RngKey{seed, mix64(seed + kGolden) ^ mix64(replica + 0x5851f42d4c957f2dull)};
}

class RngStream {
 public:
  explicit constexpr RngStream(RngKey key) noexcept
      : state_(mix64(key.seed + kGolden) ^ mix64(key.stream + 0xd6e8feb86659fd93ull)) {}

  constexpr std::uint64_t next_u64() noexcept { return mix64(state_ += kGolden); }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Strictly positive Exp(rate) variate; rate > 0.
  double next_exponential(double rate) noexcept {
    double g = 0.0;
    do {
      g = -std::log1p(-next_unit()) / rate;
    } while (!(g > 0.0));
    return g;
  }

  // Bernoulli(p).
  bool next_bernoulli(double p) noexcept { return next_unit() < p; }

 private:
  std::uint64_t state_;
};

// Poisson(rate) arrival times in (t0, t1], appended in increasing order.
inline void append_poisson_times(std::vector<double>& out, double rate, double t0, double t1,
                                 RngStream& rng) {
  if (!(rate > 0.0) || !(t1 > t0)) return;
  double t = t0;
  for (;;) {
    t += rng.next_exponential(rate);
    if (t > t1) break;
    out.push_back(t);
  }
}

}  // namespace cplab
