#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "tanglefl/ledger.hpp"
#include "tanglefl/rng.hpp"

namespace tanglefl {

struct WalkConfig {
    double alpha = 10.0;          // bias strength; 0 = uniform over children
    std::uint32_t ref_walks = 5;  // walks used for the reference-model search
    std::uint32_t start_depth = 15; // parent-steps back from a random tip

    void validate() const;
};

/// Work counters used by the measured energy-accounting mode.
struct WalkStats {
    std::uint64_t steps = 0;              // branch decisions taken
    std::uint64_t evaluations = 0;        // model accuracy tests on local data
    std::uint64_t confidence_updates = 0; // path-node recordings
    std::uint64_t rating_calls = 0;       // subtree-size computations
};

/// Scores one node's model on the walking client's local test data.
using NodeEvaluator = std::function<double(NodeId)>;

/// Child selection weights: each accuracy is normalized into [-1, 0] against
/// the best and worst sibling and weighted exp(alpha * normalized), so the
/// most accurate child always carries the largest weight. Equal accuracies
/// (or alpha = 0) give uniform weights.
std::vector<double> child_weights(std::span<const double> accuracies, double alpha);

/// Accuracy-biased walk from `start` down child edges until a tip is
/// reached. Every child of the current node is evaluated on the caller's
/// local data at each step. Returns the tip (the start itself if childless).
/// `path`, when given, receives every visited node including start and tip.
NodeId random_walk(const DagLedger& ledger, NodeId start, const NodeEvaluator& evaluate,
                   const WalkConfig& cfg, RngStream& rng, WalkStats* stats = nullptr,
                   std::vector<NodeId>* path = nullptr);

/// Walk entry point: a uniformly random tip, backed up `start_depth` parent
/// steps (uniform parent choice); genesis when the ledger is shallower.
NodeId walk_start(const DagLedger& ledger, const WalkConfig& cfg, RngStream& rng);

/// Two tips obtained by independent biased walks from a shared start node.
/// The results may coincide.
std::pair<NodeId, NodeId> select_two_tips(const DagLedger& ledger, const NodeEvaluator& evaluate,
                                          const WalkConfig& cfg, RngStream& rng,
                                          WalkStats* stats = nullptr);

/// Baseline reference-model search: ref_walks biased walks, each from a
/// fresh start; confidence(n) counts walks whose path contains n, rating(n)
/// is the approval subtree size. Returns the interior node maximizing
/// (confidence, rating, lowest id); falls back to any visited node (genesis
/// included) when no interior node was seen.
NodeId reference_model(const DagLedger& ledger, const NodeEvaluator& evaluate,
                       const WalkConfig& cfg, RngStream& rng, WalkStats* stats = nullptr);

} // namespace tanglefl
