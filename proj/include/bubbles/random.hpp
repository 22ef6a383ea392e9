#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

namespace bubbles {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A stream is
/// identified by a 64-bit key and a 64-bit stream id; the remaining 64 counter
/// bits enumerate blocks of four 32-bit outputs. Streams with distinct
/// (key, stream id) never overlap.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t key, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// The raw bijection: ten rounds applied to `counter` under `key`.
  static Counter block(Counter counter, Key key);

  std::uint64_t blocks_consumed() const { return block_index_; }

 private:
  Key key_;
  std::uint64_t stream_id_;
  std::uint64_t block_index_ = 0;
  Counter buffer_{};
  unsigned next_ = 4;
};

/// Per-path random stream: uniforms on the open interval (0, 1) plus ziggurat
/// normal and exponential variates on top of one Philox stream.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t stream_id) : engine_(master_seed, stream_id) {}

  /// Uniform on (0, 1) with 53 random bits.
  double uniform();
  double normal() { return normal_(engine_); }
  double exponential() { return exponential_(engine_); }

  Philox4x32& engine() { return engine_; }

 private:
  Philox4x32 engine_;
  boost::random::normal_distribution<double> normal_;
  boost::random::exponential_distribution<double> exponential_;
};

}  // namespace bubbles
