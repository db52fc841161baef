#pragma once

#include <array>
#include <cstdint>

namespace ipl {

/// Philox4x32-10 counter-based generator. The key is the seed; the upper half
/// of the counter selects the substream, the lower half counts blocks.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream);

  static Block bijection(Block counter, Key key);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on (0, 1) with 53 random bits.
  double uniform();
  double normal();

 private:
  Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  int used_ = 4;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ipl
