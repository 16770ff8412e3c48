#pragma once

#include <array>
#include <cstdint>

namespace ssgm {

/// Philox4x32-10 counter-based block generator.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key);
};

/// Stream of standard normal variates for substream `stream` of `seed`.
///
/// Block b of the stream is Philox(counter = {b_lo, b_hi, stream_lo,
/// stream_hi}, key = {seed_lo, seed_hi}); each block yields two uniforms in
/// (0,1) with 53-bit resolution and, through Box-Muller, two normals.
/// Streams with different (seed, stream) pairs never share a counter.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream);

  double next();

  /// Uniform in (0,1); consumes half a block.
  double uniform();

 private:
  void refill();

  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<double, 2> uniforms_{};
  int uniforms_left_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer; used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace ssgm
