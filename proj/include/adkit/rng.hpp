#pragma once

// Counter-based Philox4x32-10. A stream is the pair (seed, stream index):
// the seed is the key, the stream index fills the upper half of the
// counter, so streams never overlap and path k can be generated without
// touching paths 0..k-1.

#include <array>
#include <cstdint>
#include <limits>

namespace adkit {

using PhiloxBlock = std::array<std::uint32_t, 4>;

/// One Philox4x32-10 block for the given counter and key.
PhiloxBlock philox4x32_10(PhiloxBlock counter, std::array<std::uint32_t, 2> key);

class PhiloxStream {
 public:
  using result_type = std::uint64_t;

  PhiloxStream(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();
  /// Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform();
  /// Standard normal by inversion of the CDF.
  double normal();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_index_ = 0;
  PhiloxBlock buffer_{};
  int used_ = 4;
};

}  // namespace adkit
