#include "tanglefl/walk.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace tanglefl {

void WalkConfig::validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw ConfigError("walk: alpha must be finite and >= 0");
    }
    if (ref_walks == 0) throw ConfigError("walk: ref_walks must be >= 1");
    if (start_depth == 0) throw ConfigError("walk: start_depth must be >= 1");
}

std::vector<double> child_weights(std::span<const double> accuracies, double alpha) {
    if (accuracies.empty()) throw std::invalid_argument("child_weights: empty accuracy list");
    const auto [lo, hi] = std::minmax_element(accuracies.begin(), accuracies.end());
    const double spread = *hi - *lo;
    std::vector<double> weights(accuracies.size());
    for (std::size_t i = 0; i < accuracies.size(); ++i) {
        // normalized in [-1, 0]; all zero when the accuracies are equal
        const double normalized = spread > 0.0 ? (accuracies[i] - *hi) / spread : 0.0;
        weights[i] = std::exp(alpha * normalized);
    }
    return weights;
}

NodeId random_walk(const DagLedger& ledger, NodeId start, const NodeEvaluator& evaluate,
                   const WalkConfig& cfg, RngStream& rng, WalkStats* stats,
                   std::vector<NodeId>* path) {
    NodeId current = start;
    if (path) path->push_back(current);
    std::vector<double> accuracies;
    while (true) {
        const std::vector<NodeId>& next = ledger.children(current);
        if (next.empty()) return current;
        accuracies.resize(next.size());
        for (std::size_t i = 0; i < next.size(); ++i) {
            accuracies[i] = evaluate(next[i]);
        }
        if (stats) {
            stats->steps += 1;
            stats->evaluations += next.size();
        }
        const std::vector<double> weights = child_weights(accuracies, cfg.alpha);
        current = next[rng.weighted_choice(weights)];
        if (path) path->push_back(current);
    }
}

NodeId walk_start(const DagLedger& ledger, const WalkConfig& cfg, RngStream& rng) {
    const std::set<NodeId>& tips = ledger.tips();
    auto it = tips.begin();
    std::advance(it, static_cast<std::ptrdiff_t>(rng.uniform_below(tips.size())));
    NodeId current = *it;
    for (std::uint32_t depth = 0; depth < cfg.start_depth; ++depth) {
        const std::vector<NodeId>& parents = ledger.node(current).parents;
        if (parents.empty()) break; // genesis
        current = parents[rng.uniform_below(parents.size())];
    }
    return current;
}

std::pair<NodeId, NodeId> select_two_tips(const DagLedger& ledger, const NodeEvaluator& evaluate,
                                          const WalkConfig& cfg, RngStream& rng,
                                          WalkStats* stats) {
    const NodeId start = walk_start(ledger, cfg, rng);
    const NodeId first = random_walk(ledger, start, evaluate, cfg, rng, stats);
    const NodeId second = random_walk(ledger, start, evaluate, cfg, rng, stats);
    return {first, second};
}

NodeId reference_model(const DagLedger& ledger, const NodeEvaluator& evaluate,
                       const WalkConfig& cfg, RngStream& rng, WalkStats* stats) {
    // confidence(n) = number of walks whose path contains n (0/1 per walk)
    std::map<NodeId, std::uint32_t> confidence;
    std::vector<NodeId> path;
    for (std::uint32_t w = 0; w < cfg.ref_walks; ++w) {
        path.clear();
        const NodeId start = walk_start(ledger, cfg, rng);
        random_walk(ledger, start, evaluate, cfg, rng, stats, &path);
        std::sort(path.begin(), path.end());
        path.erase(std::unique(path.begin(), path.end()), path.end());
        for (NodeId n : path) {
            confidence[n] += 1;
            if (stats) stats->confidence_updates += 1;
        }
    }

    // Tips carry no endorsement yet and genesis holds no trained model, so
    // both are candidates only when nothing else was visited.
    bool have_interior = false;
    for (const auto& [n, c] : confidence) {
        if (n != 0 && !ledger.is_tip(n)) {
            have_interior = true;
            break;
        }
    }

    NodeId best = 0;
    std::uint32_t best_confidence = 0;
    std::uint64_t best_rating = 0;
    bool first = true;
    for (const auto& [n, c] : confidence) {
        if (have_interior && (n == 0 || ledger.is_tip(n))) continue;
        const std::uint64_t rating = ledger.subtree_size(n);
        if (stats) stats->rating_calls += 1;
        // lexicographic (confidence, rating, lowest id); map order is
        // ascending id so strict > keeps the smallest id among ties
        if (first || c > best_confidence ||
            (c == best_confidence && rating > best_rating)) {
            best = n;
            best_confidence = c;
            best_rating = rating;
            first = false;
        }
    }
    return best;
}

} // namespace tanglefl
