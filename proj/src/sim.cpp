#include "tanglefl/sim.hpp"

#include <algorithm>
#include <exception>
#include <functional>
#include <map>
#include <thread>
#include <utility>

namespace tanglefl {

namespace {

// Stream tags keep every random purpose on its own sequence, so client
// parallelism and evaluation sampling never perturb each other.
constexpr std::uint64_t kStreamGenesis = 0x6E15;
constexpr std::uint64_t kStreamScheduler = 0x5C8D;
constexpr std::uint64_t kStreamEval = 0xE7A1;
constexpr std::uint64_t kStreamCommunity = 0xC0DE;
constexpr std::uint64_t kClientStreamBase = 0xC11E0000;

struct StepResult {
    ClientId client = 0;
    ParamVector new_params;
    NodeId tip1 = 0;
    NodeId tip2 = 0;
    bool publish = false;
    NodeId reference = 0;
    double new_loss = 0.0;
    double ref_loss = 0.0;
    double delta_value = 0.0;
    bool degenerate = false;
    EnergyRow energy;
};

/// One client's in-round work against the immutable round-start snapshot.
/// Touches only the client's own rng, so steps can run concurrently.
StepResult client_step(const SimConfig& cfg, const DagLedger& ledger, ClientState& client,
                       std::uint32_t round) {
    StepResult out;
    out.client = client.id;

    NodeEvaluator eval = [&](NodeId n) {
        return accuracy(cfg.model, ledger.node(n).payload, client.test_shard);
    };

    WalkStats tip_stats;
    const auto [t1, t2] = select_two_tips(ledger, eval, cfg.walk, client.rng, &tip_stats);
    out.tip1 = t1;
    out.tip2 = t2;
    const ParamVector avg = average(ledger.node(t1).payload, ledger.node(t2).payload);
    out.new_params = local_train(cfg.model, avg, client.train_shard, cfg.train, client.rng);

    WalkStats ref_stats;
    switch (cfg.variant) {
    case Variant::kSdagfl: {
        out.reference = reference_model(ledger, eval, cfg.walk, client.rng, &ref_stats);
        out.new_loss = loss(cfg.model, out.new_params, client.test_shard);
        out.ref_loss = loss(cfg.model, ledger.node(out.reference).payload, client.test_shard);
        out.publish = out.new_loss < out.ref_loss;
        break;
    }
    case Variant::kEsdagfl: {
        const DeltaResult d = delta_detailed(out.new_params, avg);
        out.delta_value = d.value;
        out.degenerate = d.degenerate;
        out.publish = d.value >= cfg.trigger.threshold;
        break;
    }
    case Variant::kAlwaysPublish:
        out.publish = true;
        break;
    }

    EnergyRow& row = out.energy;
    row.round = round;
    row.client = client.id;
    const CostParams& cost = client.cost;
    const bool baseline = cfg.variant == Variant::kSdagfl;
    if (cfg.accounting == EnergyAccounting::kFormula) {
        row.tip = tip_energy(cost);
        row.reference = baseline ? reference_energy(cost) : 0.0;
        row.tip_time = tip_time(cost);
    } else {
        row.tip = measured_tip_energy(cost, tip_stats.evaluations);
        row.reference = baseline ? measured_reference_energy(cost, ref_stats.evaluations,
                                                             ref_stats.confidence_updates,
                                                             ref_stats.rating_calls)
                                 : 0.0;
        row.tip_time = measured_tip_time(cost, tip_stats.evaluations);
    }
    row.aggregation = aggregation_energy(cost);
    row.training =
        training_energy(cost, cfg.train.batch_size, cfg.train.batches, cfg.train.epochs);
    row.total = row.tip + row.aggregation + row.training + row.reference;
    return out;
}

/// Both walks may land on the same node; the publish rule needs two distinct
/// parents once the ledger has grown past genesis. A doubled tip approves
/// itself plus its first parent; a doubled genesis approves the oldest site
/// node alongside it.
std::pair<NodeId, NodeId> resolve_parents(const DagLedger& ledger, NodeId t1, NodeId t2) {
    if (t1 != t2) return {t1, t2};
    if (ledger.node_count() == 1) return {t1, t2}; // genesis-only bootstrap
    const Transaction& tx = ledger.node(t1);
    if (!tx.parents.empty()) return {t1, tx.parents.front()};
    return {t1, NodeId{1}};
}

void run_chunked(std::size_t n, unsigned threads,
                 const std::function<void(std::size_t, std::size_t)>& work) {
    const std::size_t workers = std::min<std::size_t>(threads, n);
    if (workers <= 1) {
        work(0, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t k = 0; k < workers; ++k) {
        const std::size_t begin = k * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&work, &errors, k, begin, end] {
            try {
                work(begin, end);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace

void SimConfig::validate() const {
    if (rounds < 1) throw ConfigError("sim.rounds must be >= 1");
    task.validate();
    model.validate();
    train.validate();
    walk.validate();
    trigger.validate();
    cost.validate();
    const std::uint64_t total =
        static_cast<std::uint64_t>(task.num_clusters) * task.clients_per_cluster;
    if (clients_per_round < 1 || clients_per_round > total)
        throw ConfigError("sim.clients_per_round must be in [1, total clients]");
    if (eval_every < 1) throw ConfigError("sim.eval_every must be >= 1");
    if (!(eval_fraction > 0.0) || eval_fraction > 1.0)
        throw ConfigError("sim.eval_fraction must be in (0, 1]");
    if (metrics_window < 1) throw ConfigError("sim.metrics_window must be >= 1");
    if (model.input_dim != task.input_dim)
        throw ConfigError("model.input_dim must equal task.input_dim");
    if (model.num_classes < task.num_classes())
        throw ConfigError("model.num_classes must cover every task label");
}

SimResult run(const SimConfig& cfg) {
    cfg.validate();

    std::vector<ClientData> dataset = generate(cfg.task);
    std::vector<ClientState> clients;
    clients.reserve(dataset.size());
    for (ClientData& cd : dataset) {
        ClientState c;
        c.id = cd.id;
        c.cluster = cd.cluster;
        c.train_shard = std::move(cd.train);
        c.test_shard = std::move(cd.test);
        c.cost = cfg.cost;
        c.rng = RngStream(cfg.seed, kClientStreamBase + cd.id);
        clients.push_back(std::move(c));
    }

    RngStream genesis_rng(cfg.seed, kStreamGenesis);
    DagLedger ledger = DagLedger::init(init_params(cfg.model, genesis_rng));
    RngStream scheduler(cfg.seed, kStreamScheduler);
    RngStream eval_rng(cfg.seed, kStreamEval);
    RngStream community_rng(cfg.seed, kStreamCommunity);

    std::map<ClientId, std::uint32_t> truth;
    for (const ClientState& c : clients) truth[c.id] = c.cluster;

    const unsigned threads =
        cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());

    EnergyLedger energy;
    std::vector<RoundRecord> records;
    std::vector<PublishDecision> decisions;
    std::uint64_t publishes = 0;
    std::uint64_t selections = 0;

    for (std::uint32_t round = 1; round <= cfg.rounds; ++round) {
        const std::vector<std::uint64_t> picks =
            scheduler.sample_without_replacement(clients.size(), cfg.clients_per_round);

        std::vector<StepResult> results(picks.size());
        run_chunked(picks.size(), threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i)
                results[i] = client_step(cfg, ledger, clients[picks[i]], round);
        });

        // Barrier: serialize energy, decisions and commits in client-id
        // order (picks come back sorted).
        for (std::size_t i = 0; i < results.size(); ++i) {
            StepResult& r = results[i];
            ClientState& c = clients[picks[i]];
            ++selections;
            energy.add(r.energy);

            PublishDecision d;
            d.round = round;
            d.client = r.client;
            d.published = r.publish;
            d.reference = r.reference;
            d.new_loss = r.new_loss;
            d.ref_loss = r.ref_loss;
            d.delta = r.delta_value;
            d.degenerate = r.degenerate;
            if (r.publish) {
                const auto parents = resolve_parents(ledger, r.tip1, r.tip2);
                d.node = ledger.publish(std::move(r.new_params), parents, r.client, round);
                ++c.publishes;
                ++publishes;
            } else {
                ++c.rejections;
            }
            if (r.degenerate) ++c.degenerate_deltas;
            decisions.push_back(d);
        }

        if (round % cfg.eval_every == 0 || round == cfg.rounds) {
            const EvalResult ev = evaluate_population(cfg.model, cfg.walk, ledger, clients,
                                                      cfg.eval_fraction, eval_rng);
            const std::uint32_t first =
                round > cfg.metrics_window ? round - cfg.metrics_window + 1 : 1;
            const ApprovalGraph graph = approval_graph(ledger, RoundRange{first, round});
            const CommunityResult comm = detect_communities(graph, community_rng);

            RoundRecord rec;
            rec.round = round;
            rec.mean_accuracy = ev.mean_accuracy;
            rec.mean_loss = ev.mean_loss;
            rec.modularity = comm.modularity;
            rec.modules = comm.num_communities;
            rec.pureness = approval_pureness(graph, truth);
            rec.publish_rate =
                selections ? static_cast<double>(publishes) / static_cast<double>(selections) : 0.0;
            rec.cumulative_energy = energy.total();
            records.push_back(rec);
        }
    }

    return SimResult{std::move(records), std::move(energy),    std::move(ledger),
                     std::move(decisions), std::move(clients), publishes,
                     selections};
}

std::vector<SweepRow> sweep_threshold(const SimConfig& cfg, std::span<const double> thresholds) {
    if (thresholds.empty()) throw ConfigError("sweep: at least one threshold is required");

    std::vector<SweepRow> rows;
    rows.reserve(thresholds.size());
    for (double threshold : thresholds) {
        SimConfig one = cfg;
        one.variant = Variant::kEsdagfl;
        one.trigger.mode = PublishMode::kEventTriggered;
        one.trigger.threshold = threshold;
        const SimResult res = run(one);
        const RoundRecord& last = res.records.back();
        const double rate =
            res.selections ? static_cast<double>(res.publishes) / static_cast<double>(res.selections)
                           : 0.0;
        rows.push_back(SweepRow{threshold, last.mean_accuracy, last.mean_loss, last.pureness, rate,
                                res.energy.total()});
    }
    return rows;
}

} // namespace tanglefl
