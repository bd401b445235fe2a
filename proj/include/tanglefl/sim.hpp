#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tanglefl/client.hpp"
#include "tanglefl/data.hpp"
#include "tanglefl/energy.hpp"
#include "tanglefl/ledger.hpp"
#include "tanglefl/metrics.hpp"
#include "tanglefl/model.hpp"
#include "tanglefl/publish.hpp"
#include "tanglefl/walk.hpp"

namespace tanglefl {

enum class Variant { kSdagfl, kEsdagfl, kAlwaysPublish };
enum class EnergyAccounting { kFormula, kMeasured };

/// Full description of one simulation run. Identical configs (including
/// seed) produce byte-identical outputs regardless of thread count.
struct SimConfig {
    Variant variant = Variant::kEsdagfl;
    std::uint32_t rounds = 100;
    std::uint32_t clients_per_round = 10;
    std::uint32_t eval_every = 5;     // metric sampling period, in rounds
    double eval_fraction = 0.05;      // share of clients evaluated each time
    std::uint32_t metrics_window = 20; // rounds of publishes in the approval graph
    EnergyAccounting accounting = EnergyAccounting::kFormula;
    std::uint64_t seed = 42;
    std::uint32_t threads = 1; // client-step parallelism; 0 = hardware default

    ClusterTaskConfig task;
    ModelSpec model;
    TrainConfig train;
    WalkConfig walk;
    TriggerConfig trigger;
    CostParams cost;

    void validate() const;
};

/// One client-update outcome, enough to replay the publish rule offline.
struct PublishDecision {
    std::uint32_t round = 0;
    ClientId client = 0;
    bool published = false;
    NodeId node = 0;       // id of the published transaction, when any
    NodeId reference = 0;  // baseline comparison target
    double new_loss = 0.0; // candidate's local-test loss (baseline rule)
    double ref_loss = 0.0; // reference model's local-test loss
    double delta = 0.0;    // relative parameter change (event rule)
    bool degenerate = false; // delta denominator was a zero vector
};

struct SimResult {
    std::vector<RoundRecord> records; // one row per evaluation round
    EnergyLedger energy;
    DagLedger ledger;
    std::vector<PublishDecision> decisions;
    std::vector<ClientState> clients; // final per-client counters and shards
    std::uint64_t publishes = 0;
    std::uint64_t selections = 0; // rounds * clients_per_round
};

/// Executes the round loop: sample clients, walk/average/train against the
/// round-start snapshot, decide per the variant's publish rule, commit at
/// the barrier in client-id order, account energy, sample metrics.
SimResult run(const SimConfig& cfg);

struct SweepRow {
    double threshold = 0.0;
    double final_accuracy = 0.0;
    double final_loss = 0.0;
    double pureness = 0.0;
    double publish_rate = 0.0; // publishes / selections over the whole run
    double total_energy = 0.0;
};

/// One seed-pinned event-triggered run per threshold.
std::vector<SweepRow> sweep_threshold(const SimConfig& cfg, std::span<const double> thresholds);

} // namespace tanglefl
