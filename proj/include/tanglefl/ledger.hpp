#pragma once

#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "tanglefl/common.hpp"
#include "tanglefl/model.hpp"

namespace tanglefl {

/// One DAG transaction. The genesis task node has no parents; every other
/// node approves exactly two prior nodes and carries a complete model.
struct Transaction {
    NodeId id = 0;
    std::vector<NodeId> parents; // empty for genesis, else exactly 2
    ParamVector payload;
    ClientId publisher = 0;
    std::uint32_t round = 0;
};

/// Append-only DAG transaction store shared by all simulated clients.
///
/// Node ids are sequence numbers assigned in publish order, so acyclicity
/// holds by construction (parents always have smaller ids). The tips set
/// tracks exactly the nodes without children.
class DagLedger {
  public:
    /// Creates a ledger holding only the genesis task node.
    static DagLedger init(ParamVector genesis_params);

    /// Rebuilds a ledger from raw transactions (snapshot import, tests).
    /// Validates ids, parent counts, acyclicity and payload dimensions, but
    /// not the live-publish parent-distinctness policy.
    static DagLedger restore(std::vector<Transaction> transactions);

    /// Appends a new node approving the two parents and returns its id.
    /// The two parent ids must differ unless the ledger still holds only
    /// the genesis node, in which case both slots reference it.
    NodeId publish(ParamVector payload, std::pair<NodeId, NodeId> parents,
                   ClientId publisher, std::uint32_t round);

    const Transaction& node(NodeId id) const;
    const std::vector<NodeId>& children(NodeId id) const;

    std::size_t node_count() const { return nodes_.size(); }
    const std::set<NodeId>& tips() const { return tips_; }
    bool is_tip(NodeId id) const;

    /// Number of nodes approving `id` directly or transitively.
    std::uint64_t subtree_size(NodeId id) const;

    const std::vector<Transaction>& nodes() const { return nodes_; }
    std::size_t payload_dim() const;

  private:
    DagLedger() = default;
    void check_id(NodeId id) const;

    std::vector<Transaction> nodes_;
    std::vector<std::vector<NodeId>> children_;
    std::set<NodeId> tips_;
};

} // namespace tanglefl
