#pragma once

#include <array>
#include <cstdint>

namespace scorelab {

/// Philox4x32-10 counter-based generator. Stateless: every block is a pure
/// function of (key, counter), so streams split without shared state.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key);
};

/// Stream of standard normals keyed by (seed, index, step). Each step owns
/// 2^16 lanes of four 32-bit words.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t index, std::uint32_t step, std::uint32_t stream = 0);

  double normal();
  double uniform();  // in (0, 1)

 private:
  void refill();

  Philox4x32::Key key_;
  Philox4x32::Counter ctr_;
  Philox4x32::Counter buf_{};
  int used_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace scorelab
