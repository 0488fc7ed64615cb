#pragma once

#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>

namespace hfvol {

struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t replication_index = 0;
};

using RandomStream = std::mt19937_64;

/// Ziggurat standard normal sampler.
using StandardNormal = boost::random::normal_distribution<double>;

/// Engine seeded from (master_seed, replication_index) through std::seed_seq,
/// so distinct replications get decorrelated states and the same inputs
/// always give the same stream.
RandomStream derive_stream(const SeedSpec& seed);

}  // namespace hfvol
