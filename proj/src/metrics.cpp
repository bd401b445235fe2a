#include "tanglefl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tanglefl {

void ApprovalGraph::add_edge(ClientId a, ClientId b, double weight) {
    if (a > b) std::swap(a, b);
    vertices.insert(a);
    vertices.insert(b);
    edges[{a, b}] += weight;
}

double ApprovalGraph::total_weight() const {
    double w = 0.0;
    for (const auto& [key, weight] : edges) w += weight;
    return w;
}

ApprovalGraph approval_graph(const DagLedger& ledger, RoundRange window) {
    ApprovalGraph g;
    for (const Transaction& tx : ledger.nodes()) {
        if (tx.parents.empty()) continue; // genesis publishes nothing
        if (tx.round < window.first || tx.round > window.last) continue;
        for (NodeId parent : tx.parents) {
            const Transaction& approved = ledger.node(parent);
            if (approved.parents.empty()) continue; // genesis has no publisher
            g.add_edge(tx.publisher, approved.publisher, 1.0);
        }
    }
    return g;
}

double modularity(const ApprovalGraph& g, const std::map<ClientId, std::uint32_t>& partition) {
    const double total = g.total_weight();
    if (total <= 0.0) return 0.0;

    std::map<std::uint32_t, double> w_in;     // weight with both ends inside
    std::map<std::uint32_t, double> deg_sum;  // summed vertex degrees
    for (ClientId v : g.vertices) deg_sum[partition.at(v)] += 0.0;
    for (const auto& [key, weight] : g.edges) {
        const std::uint32_t ca = partition.at(key.first);
        const std::uint32_t cb = partition.at(key.second);
        deg_sum[ca] += weight;
        deg_sum[cb] += weight; // self-loop: both increments hit ca
        if (ca == cb) w_in[ca] += weight;
    }

    double q = 0.0;
    for (const auto& [community, deg] : deg_sum) {
        const double in = w_in.count(community) ? w_in.at(community) : 0.0;
        const double frac = deg / (2.0 * total);
        q += in / total - frac * frac;
    }
    return q;
}

namespace {

/// Flat weighted graph used during Louvain aggregation rounds.
struct LocalGraph {
    std::size_t n = 0;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> neighbors; // no self-loops
    std::vector<double> self_loops;
    std::vector<double> degree; // self-loops count twice
    double total_weight = 0.0;
};

/// One Louvain level: local moving until no vertex changes community.
/// Returns the dense community labels and whether any move happened.
std::pair<std::vector<std::uint32_t>, bool> local_moving(const LocalGraph& g, RngStream& rng) {
    std::vector<std::uint32_t> community(g.n);
    std::iota(community.begin(), community.end(), 0u);
    std::vector<double> comm_degree = g.degree;

    std::vector<std::uint32_t> order(g.n);
    std::iota(order.begin(), order.end(), 0u);
    rng.shuffle(order);

    const double two_w = 2.0 * g.total_weight;
    bool any_move = false;
    bool moved = true;
    while (moved) {
        moved = false;
        for (std::uint32_t v : order) {
            const std::uint32_t old_c = community[v];
            comm_degree[old_c] -= g.degree[v];

            // Weight from v into each adjacent community (self-loops travel
            // with v and cancel out of the comparison).
            std::map<std::uint32_t, double> to_comm;
            to_comm[old_c] += 0.0;
            for (const auto& [u, w] : g.neighbors[v]) to_comm[community[u]] += w;

            std::uint32_t best_c = old_c;
            double best_gain = to_comm[old_c] - comm_degree[old_c] * g.degree[v] / two_w;
            for (const auto& [c, w_to] : to_comm) {
                if (c == old_c) continue;
                const double gain = w_to - comm_degree[c] * g.degree[v] / two_w;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_c = c;
                }
            }

            comm_degree[best_c] += g.degree[v];
            community[v] = best_c;
            if (best_c != old_c) {
                moved = true;
                any_move = true;
            }
        }
    }
    return {community, any_move};
}

/// Renumbers labels densely by first appearance in index order.
std::uint32_t compact_labels(std::vector<std::uint32_t>& labels) {
    std::map<std::uint32_t, std::uint32_t> remap;
    for (std::uint32_t& label : labels) {
        auto [it, inserted] = remap.emplace(label, static_cast<std::uint32_t>(remap.size()));
        label = it->second;
    }
    return static_cast<std::uint32_t>(remap.size());
}

LocalGraph aggregate(const LocalGraph& g, const std::vector<std::uint32_t>& community,
                     std::uint32_t num_communities) {
    LocalGraph out;
    out.n = num_communities;
    out.neighbors.resize(out.n);
    out.self_loops.assign(out.n, 0.0);
    out.degree.assign(out.n, 0.0);
    out.total_weight = g.total_weight;

    std::map<std::pair<std::uint32_t, std::uint32_t>, double> merged;
    for (std::uint32_t v = 0; v < g.n; ++v) {
        out.self_loops[community[v]] += g.self_loops[v];
        for (const auto& [u, w] : g.neighbors[v]) {
            if (u < v) continue; // visit each undirected edge once
            std::uint32_t a = community[v];
            std::uint32_t b = community[u];
            if (a > b) std::swap(a, b);
            if (a == b) {
                out.self_loops[a] += w;
            } else {
                merged[{a, b}] += w;
            }
        }
    }
    for (const auto& [key, w] : merged) {
        out.neighbors[key.first].emplace_back(key.second, w);
        out.neighbors[key.second].emplace_back(key.first, w);
    }
    for (std::uint32_t v = 0; v < out.n; ++v) {
        out.degree[v] = 2.0 * out.self_loops[v];
        for (const auto& [u, w] : out.neighbors[v]) out.degree[v] += w;
    }
    return out;
}

} // namespace

CommunityResult detect_communities(const ApprovalGraph& g, RngStream& rng) {
    CommunityResult result;
    if (g.vertices.empty()) return result;

    std::vector<ClientId> ids(g.vertices.begin(), g.vertices.end());
    std::map<ClientId, std::uint32_t> index;
    for (std::uint32_t i = 0; i < ids.size(); ++i) index[ids[i]] = i;

    LocalGraph graph;
    graph.n = ids.size();
    graph.neighbors.resize(graph.n);
    graph.self_loops.assign(graph.n, 0.0);
    graph.degree.assign(graph.n, 0.0);
    for (const auto& [key, w] : g.edges) {
        const std::uint32_t a = index[key.first];
        const std::uint32_t b = index[key.second];
        graph.total_weight += w;
        if (a == b) {
            graph.self_loops[a] += w;
        } else {
            graph.neighbors[a].emplace_back(b, w);
            graph.neighbors[b].emplace_back(a, w);
        }
    }
    for (std::uint32_t v = 0; v < graph.n; ++v) {
        graph.degree[v] = 2.0 * graph.self_loops[v];
        for (const auto& [u, w] : graph.neighbors[v]) graph.degree[v] += w;
    }

    // membership[v] = current community of original vertex v.
    std::vector<std::uint32_t> membership(graph.n);
    std::iota(membership.begin(), membership.end(), 0u);

    if (graph.total_weight > 0.0) {
        while (true) {
            auto [community, moved] = local_moving(graph, rng);
            if (!moved) break;
            const std::uint32_t count = compact_labels(community);
            for (std::uint32_t& m : membership) m = community[m];
            if (count == graph.n) break; // nothing merged; fixed point
            graph = aggregate(graph, community, count);
        }
    }

    // Canonical labels: communities numbered by their lowest client id.
    std::uint32_t final_count = compact_labels(membership);
    for (std::uint32_t i = 0; i < ids.size(); ++i) result.assignments[ids[i]] = membership[i];
    result.num_communities = final_count;
    result.modularity = modularity(g, result.assignments);
    return result;
}

double approval_pureness(const ApprovalGraph& g, const std::map<ClientId, std::uint32_t>& truth) {
    double same = 0.0;
    double total = 0.0;
    for (const auto& [key, weight] : g.edges) {
        if (key.first == key.second) continue; // own-node approvals don't count
        total += weight;
        if (truth.at(key.first) == truth.at(key.second)) same += weight;
    }
    if (total <= 0.0) return 1.0;
    return same / total;
}

EvalResult evaluate_population(const ModelSpec& spec, const WalkConfig& walk_cfg,
                               const DagLedger& ledger, std::span<const ClientState> clients,
                               double sample_fraction, RngStream& rng) {
    if (clients.empty() || sample_fraction <= 0.0 || sample_fraction > 1.0)
        throw ConfigError("evaluate_population: need clients and fraction in (0, 1]");

    // Order by client id so the result ignores container order.
    std::vector<std::size_t> by_id(clients.size());
    std::iota(by_id.begin(), by_id.end(), std::size_t{0});
    std::sort(by_id.begin(), by_id.end(),
              [&](std::size_t a, std::size_t b) { return clients[a].id < clients[b].id; });

    const auto want = static_cast<std::uint64_t>(
        std::ceil(sample_fraction * static_cast<double>(clients.size())));
    const std::uint64_t k = std::max<std::uint64_t>(1, std::min<std::uint64_t>(want, clients.size()));
    const std::vector<std::uint64_t> picks = rng.sample_without_replacement(clients.size(), k);

    EvalResult out;
    for (std::uint64_t pick : picks) {
        const ClientState& client = clients[by_id[pick]];
        NodeEvaluator eval = [&](NodeId n) {
            return accuracy(spec, ledger.node(n).payload, client.test_shard);
        };
        const auto [t1, t2] = select_two_tips(ledger, eval, walk_cfg, rng);
        const ParamVector merged = average(ledger.node(t1).payload, ledger.node(t2).payload);
        out.mean_accuracy += accuracy(spec, merged, client.test_shard);
        out.mean_loss += loss(spec, merged, client.test_shard);
    }
    out.mean_accuracy /= static_cast<double>(picks.size());
    out.mean_loss /= static_cast<double>(picks.size());
    return out;
}

} // namespace tanglefl
