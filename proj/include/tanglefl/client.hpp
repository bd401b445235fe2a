#pragma once

#include <cstdint>

#include "tanglefl/common.hpp"
#include "tanglefl/energy.hpp"
#include "tanglefl/model.hpp"
#include "tanglefl/rng.hpp"

namespace tanglefl {

/// One simulated client: private shards, cost parameters, an independent
/// rng stream (derived from the master seed and the client id) and publish
/// statistics.
struct ClientState {
    ClientId id = 0;
    std::uint32_t cluster = 0;
    DatasetShard train_shard;
    DatasetShard test_shard;
    CostParams cost;
    RngStream rng{0, 0};
    std::uint64_t publishes = 0;
    std::uint64_t rejections = 0;
    std::uint64_t degenerate_deltas = 0;
};

} // namespace tanglefl
