#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "tanglefl/client.hpp"
#include "tanglefl/ledger.hpp"
#include "tanglefl/model.hpp"
#include "tanglefl/rng.hpp"
#include "tanglefl/walk.hpp"

namespace tanglefl {

/// Weighted undirected approval graph at client granularity. Keys are
/// normalized so first <= second; a self-loop records a client approving
/// its own earlier nodes (kept in the graph, ignored by pureness).
struct ApprovalGraph {
    std::set<ClientId> vertices;
    std::map<std::pair<ClientId, ClientId>, double> edges;

    void add_edge(ClientId a, ClientId b, double weight);
    double total_weight() const;
};

/// Inclusive round window; defaults cover the whole ledger.
struct RoundRange {
    std::uint32_t first = 0;
    std::uint32_t last = UINT32_MAX;
};

/// One approval-graph edge of weight 1 per (node, non-genesis parent) pair
/// for every node published inside the window.
ApprovalGraph approval_graph(const DagLedger& ledger, RoundRange window = {});

/// Newman weighted modularity of the partition: sum over communities of
/// w_in/W - (deg/2W)^2, self-loops counting twice toward degree. Every
/// vertex must appear in `partition`. Empty graph -> 0.
double modularity(const ApprovalGraph& g, const std::map<ClientId, std::uint32_t>& partition);

struct CommunityResult {
    std::map<ClientId, std::uint32_t> assignments; // labels 0..n-1, dense
    std::uint32_t num_communities = 0;
    double modularity = 0.0;
};

/// Greedy modularity maximization (Louvain local moving + aggregation).
/// Vertex visiting order is shuffled from `rng`; everything else is
/// deterministic, ties breaking toward the lower community label. The
/// found partition never scores below the single-community Q of 0.
CommunityResult detect_communities(const ApprovalGraph& g, RngStream& rng);

/// Fraction of edge weight joining two distinct clients of the same
/// ground-truth cluster. Self-loops are excluded from both sides of the
/// ratio; a graph with no cross-client edges scores 1.
double approval_pureness(const ApprovalGraph& g, const std::map<ClientId, std::uint32_t>& truth);

struct EvalResult {
    double mean_accuracy = 0.0;
    double mean_loss = 0.0;
};

/// Samples ceil(sample_fraction * clients) clients (without replacement,
/// by ascending client id); each runs tip selection biased by accuracy on
/// its local test shard and reports the averaged pair's test metrics.
EvalResult evaluate_population(const ModelSpec& spec, const WalkConfig& walk_cfg,
                               const DagLedger& ledger, std::span<const ClientState> clients,
                               double sample_fraction, RngStream& rng);

/// Per-round CSV row emitted by the simulator.
struct RoundRecord {
    std::uint32_t round = 0;
    double mean_accuracy = 0.0;
    double mean_loss = 0.0;
    double modularity = 0.0;
    std::uint32_t modules = 0;
    double pureness = 0.0;
    double publish_rate = 0.0;
    double cumulative_energy = 0.0;
};

} // namespace tanglefl
