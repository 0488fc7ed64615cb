#include "hfvol/rng.hpp"

#include <array>

namespace hfvol {

RandomStream derive_stream(const SeedSpec& seed) {
  const std::array<std::uint32_t, 5> words{
      static_cast<std::uint32_t>(seed.master_seed), static_cast<std::uint32_t>(seed.master_seed >> 32),
      static_cast<std::uint32_t>(seed.replication_index), static_cast<std::uint32_t>(seed.replication_index >> 32),
      0x68667631u};
  std::seed_seq seq(words.begin(), words.end());
  return RandomStream(seq);
}

}  // namespace hfvol
