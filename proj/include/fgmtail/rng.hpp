#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace fgmtail {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// Maps a 128-bit counter and a 64-bit key to 128 random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// A reproducible random stream identified by (seed, stream id).
///
/// The stream id occupies the upper half of the Philox counter and the block
/// index the lower half, so every (seed, stream) pair addresses 2^64 blocks
/// that never overlap another stream. Any stream can be regenerated in
/// isolation, which is what makes chunked parallel runs independent of the
/// worker count.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform();

  /// Standard normal via the Box-Muller transform (one variate per two uniforms).
  double normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;  // 32-bit words consumed from buffer_
};

/// Stream id for `index` within a named purpose; keeps e.g. the direct
/// simulation and the star-sum simulation of one seed on disjoint streams.
constexpr std::uint64_t stream_id(std::uint32_t domain, std::uint64_t index) {
  return (static_cast<std::uint64_t>(domain) << 40) | (index & ((std::uint64_t{1} << 40) - 1));
}

}  // namespace fgmtail
