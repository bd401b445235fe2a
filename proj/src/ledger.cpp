#include "tanglefl/ledger.hpp"

#include <string>

namespace tanglefl {

DagLedger DagLedger::init(ParamVector genesis_params) {
    DagLedger ledger;
    Transaction genesis;
    genesis.id = 0;
    genesis.payload = std::move(genesis_params);
    ledger.nodes_.push_back(std::move(genesis));
    ledger.children_.emplace_back();
    ledger.tips_.insert(0);
    return ledger;
}

DagLedger DagLedger::restore(std::vector<Transaction> transactions) {
    if (transactions.empty()) throw ConfigError("restore: no transactions");
    DagLedger ledger;
    ledger.nodes_ = std::move(transactions);
    ledger.children_.resize(ledger.nodes_.size());
    const std::size_t dim = ledger.nodes_.front().payload.dim();
    for (std::size_t i = 0; i < ledger.nodes_.size(); ++i) {
        const Transaction& tx = ledger.nodes_[i];
        if (tx.id != i) throw ConfigError("restore: ids must be sequential from 0");
        if (i == 0) {
            if (!tx.parents.empty()) throw ConfigError("restore: genesis cannot have parents");
        } else if (tx.parents.size() != 2) {
            throw ConfigError("restore: non-genesis nodes need exactly 2 parents");
        }
        if (tx.payload.dim() != dim) throw ConfigError("restore: payload dimension mismatch");
        for (std::size_t s = 0; s < tx.parents.size(); ++s) {
            const NodeId p = tx.parents[s];
            if (p >= tx.id) throw ConfigError("restore: parent id must precede child id");
            if (s > 0 && p == tx.parents[s - 1]) continue; // one child edge per parent
            ledger.children_[p].push_back(tx.id);
        }
    }
    for (std::size_t i = 0; i < ledger.nodes_.size(); ++i) {
        if (ledger.children_[i].empty()) ledger.tips_.insert(i);
    }
    return ledger;
}

void DagLedger::check_id(NodeId id) const {
    if (id >= nodes_.size()) {
        throw InvalidReference("unknown node id " + std::to_string(id));
    }
}

NodeId DagLedger::publish(ParamVector payload, std::pair<NodeId, NodeId> parents,
                          ClientId publisher, std::uint32_t round) {
    check_id(parents.first);
    check_id(parents.second);
    if (payload.dim() != payload_dim()) {
        throw ShapeError("publish: payload dimension does not match the ledger");
    }
    if (parents.first == parents.second && nodes_.size() > 1) {
        throw std::invalid_argument("publish: duplicate parents allowed only on a fresh ledger");
    }

    Transaction tx;
    tx.id = nodes_.size();
    tx.parents = {parents.first, parents.second};
    tx.payload = std::move(payload);
    tx.publisher = publisher;
    tx.round = round;

    children_[parents.first].push_back(tx.id);
    if (parents.second != parents.first) children_[parents.second].push_back(tx.id);
    tips_.erase(parents.first);
    tips_.erase(parents.second);
    tips_.insert(tx.id);
    children_.emplace_back();
    nodes_.push_back(std::move(tx));
    return nodes_.back().id;
}

const Transaction& DagLedger::node(NodeId id) const {
    check_id(id);
    return nodes_[id];
}

const std::vector<NodeId>& DagLedger::children(NodeId id) const {
    check_id(id);
    return children_[id];
}

bool DagLedger::is_tip(NodeId id) const {
    check_id(id);
    return children_[id].empty();
}

std::uint64_t DagLedger::subtree_size(NodeId id) const {
    check_id(id);
    // Descendants have strictly larger ids, so a flat visited array over
    // [id+1, n) is enough.
    std::vector<char> visited(nodes_.size() - id, 0);
    std::vector<NodeId> stack{id};
    std::uint64_t count = 0;
    while (!stack.empty()) {
        const NodeId current = stack.back();
        stack.pop_back();
        for (NodeId child : children_[current]) {
            char& seen = visited[child - id];
            if (!seen) {
                seen = 1;
                ++count;
                stack.push_back(child);
            }
        }
    }
    return count;
}

std::size_t DagLedger::payload_dim() const { return nodes_.front().payload.dim(); }

} // namespace tanglefl
