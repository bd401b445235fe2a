#include "tanglefl/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

namespace tanglefl {

namespace {

using nlohmann::json;

struct Source {
    const std::string& text;
    const std::string& name;
};

/// Error with a best-effort line anchor: the first occurrence of the
/// offending key in the raw text.
[[noreturn]] void fail(const Source& src, const std::string& key_path, const std::string& message) {
    const std::string key = key_path.substr(key_path.find_last_of('.') + 1);
    const std::size_t pos = src.text.find("\"" + key + "\"");
    std::string where = src.name;
    if (pos != std::string::npos) {
        const auto line = 1 + std::count(src.text.begin(),
                                         src.text.begin() + static_cast<std::ptrdiff_t>(pos), '\n');
        where += ":" + std::to_string(line);
    }
    throw ConfigError(where + ": " + key_path + ": " + message);
}

std::string joined(const std::string& scope, const std::string& key) {
    return scope.empty() ? key : scope + "." + key;
}

void check_keys(const json& obj, const Source& src, const std::string& scope,
                std::initializer_list<std::string_view> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            fail(src, joined(scope, it.key()), "unknown field");
    }
}

const json* member(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& obj, const Source& src, const std::string& scope, const char* key,
                  double def) {
    const json* v = member(obj, key);
    if (!v) return def;
    if (!v->is_number()) fail(src, joined(scope, key), "expected a number");
    return v->get<double>();
}

std::uint64_t get_uint(const json& obj, const Source& src, const std::string& scope,
                       const char* key, std::uint64_t def, std::uint64_t max = UINT64_MAX) {
    const json* v = member(obj, key);
    if (!v) return def;
    if (!v->is_number_unsigned()) fail(src, joined(scope, key), "expected a non-negative integer");
    const auto value = v->get<std::uint64_t>();
    if (value > max)
        fail(src, joined(scope, key), "value exceeds the maximum of " + std::to_string(max));
    return value;
}

std::string get_string(const json& obj, const Source& src, const std::string& scope,
                       const char* key, const std::string& def) {
    const json* v = member(obj, key);
    if (!v) return def;
    if (!v->is_string()) fail(src, joined(scope, key), "expected a string");
    return v->get<std::string>();
}

const json empty_object = json::object();

const json& get_object(const json& obj, const Source& src, const std::string& scope,
                       const char* key) {
    const json* v = member(obj, key);
    if (!v) return empty_object;
    if (!v->is_object()) fail(src, joined(scope, key), "expected an object");
    return *v;
}

std::vector<std::vector<std::uint32_t>> get_label_sets(const json& obj, const Source& src,
                                                       const std::string& scope, const char* key) {
    const json* v = member(obj, key);
    if (!v) return {};
    const std::string path = joined(scope, key);
    if (!v->is_array()) fail(src, path, "expected an array of label arrays");
    std::vector<std::vector<std::uint32_t>> sets;
    for (const json& inner : *v) {
        if (!inner.is_array()) fail(src, path, "expected an array of label arrays");
        std::vector<std::uint32_t> labels;
        for (const json& label : inner) {
            if (!label.is_number_unsigned() || label.get<std::uint64_t>() > UINT32_MAX)
                fail(src, path, "labels must be non-negative integers");
            labels.push_back(label.get<std::uint32_t>());
        }
        sets.push_back(std::move(labels));
    }
    return sets;
}

/// Default label layout when the config names only a cluster count: the
/// ten-class three-way split for K=3, consecutive pairs otherwise.
std::vector<std::vector<std::uint32_t>> default_label_sets(std::uint32_t num_clusters) {
    if (num_clusters == 3) return {{0, 1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
    std::vector<std::vector<std::uint32_t>> sets;
    for (std::uint32_t k = 0; k < num_clusters; ++k) sets.push_back({2 * k, 2 * k + 1});
    return sets;
}

std::string to_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

} // namespace

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

const char* variant_name(Variant v) {
    switch (v) {
    case Variant::kSdagfl: return "sdagfl";
    case Variant::kEsdagfl: return "esdagfl";
    case Variant::kAlwaysPublish: return "always_publish";
    }
    return "?";
}

const char* accounting_name(EnergyAccounting a) {
    return a == EnergyAccounting::kFormula ? "formula" : "measured";
}

namespace {

const char* mode_name(PublishMode m) {
    switch (m) {
    case PublishMode::kEventTriggered: return "event";
    case PublishMode::kReferenceBaseline: return "reference";
    case PublishMode::kAlwaysPublish: return "always";
    }
    return "?";
}

} // namespace

std::string config_to_json(const SimConfig& cfg) {
    json j;
    j["variant"] = variant_name(cfg.variant);
    j["rounds"] = cfg.rounds;
    j["clients_per_round"] = cfg.clients_per_round;
    j["eval_every"] = cfg.eval_every;
    j["eval_fraction"] = cfg.eval_fraction;
    j["metrics_window"] = cfg.metrics_window;
    j["accounting"] = accounting_name(cfg.accounting);
    j["seed"] = cfg.seed;

    json& task = j["task"];
    task["num_clusters"] = cfg.task.num_clusters;
    task["clients_per_cluster"] = cfg.task.clients_per_cluster;
    task["classes_per_cluster"] = cfg.task.classes_per_cluster;
    task["input_dim"] = cfg.task.input_dim;
    task["samples_per_client"] = cfg.task.samples_per_client;
    task["class_separation"] = cfg.task.class_separation;
    task["noise_sigma"] = cfg.task.noise_sigma;
    task["seed"] = cfg.task.seed;

    json& model = j["model"];
    model["kind"] = cfg.model.kind == ModelKind::kSoftmax ? "softmax" : "mlp";
    model["input_dim"] = cfg.model.input_dim;
    model["hidden_dim"] = cfg.model.hidden_dim;
    model["num_classes"] = cfg.model.num_classes;

    json& train = j["train"];
    train["learning_rate"] = cfg.train.learning_rate;
    train["batch_size"] = cfg.train.batch_size;
    train["batches"] = cfg.train.batches;
    train["epochs"] = cfg.train.epochs;

    json& walk = j["walk"];
    walk["alpha"] = cfg.walk.alpha;
    walk["ref_walks"] = cfg.walk.ref_walks;
    walk["start_depth"] = cfg.walk.start_depth;

    json& trigger = j["trigger"];
    trigger["threshold"] = cfg.trigger.threshold;
    trigger["mode"] = mode_name(cfg.trigger.mode);

    json& cost = j["cost"];
    cost["capacitance"] = cfg.cost.capacitance;
    cost["cpu_freq"] = cfg.cost.cpu_freq;
    cost["eval_cycles"] = cfg.cost.eval_cycles;
    cost["agg_cycles"] = cfg.cost.agg_cycles;
    cost["train_cycles_per_sample"] = cfg.cost.train_cycles_per_sample;
    cost["confidence_cycles"] = cfg.cost.confidence_cycles;
    cost["rating_cycles"] = cfg.cost.rating_cycles;
    cost["walk_depth"] = cfg.cost.walk_depth;
    cost["avg_children"] = cfg.cost.avg_children;
    cost["ref_walks"] = cfg.cost.ref_walks;

    return j.dump();
}

LoadedConfig parse_config(const std::string& text, const std::string& source_name,
                          std::optional<std::uint64_t> seed_override) {
    const Source src{text, source_name};

    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(source_name + ": malformed JSON: " + e.what());
    }
    if (!root.is_object()) throw ConfigError(source_name + ": top level must be a JSON object");

    check_keys(root, src, "",
               {"variant", "rounds", "clients_per_round", "eval_every", "eval_fraction",
                "metrics_window", "accounting", "seed", "threads", "task", "model", "train",
                "walk", "trigger", "cost"});

    SimConfig cfg;

    if (!member(root, "variant")) fail(src, "variant", "missing required field");
    const std::string variant = get_string(root, src, "", "variant", "");
    if (variant == "sdagfl") {
        cfg.variant = Variant::kSdagfl;
    } else if (variant == "esdagfl") {
        cfg.variant = Variant::kEsdagfl;
    } else if (variant == "always_publish") {
        cfg.variant = Variant::kAlwaysPublish;
    } else {
        fail(src, "variant", "must be one of sdagfl, esdagfl, always_publish");
    }

    cfg.rounds = static_cast<std::uint32_t>(get_uint(root, src, "", "rounds", cfg.rounds, UINT32_MAX));
    cfg.clients_per_round = static_cast<std::uint32_t>(
        get_uint(root, src, "", "clients_per_round", cfg.clients_per_round, UINT32_MAX));
    cfg.eval_every =
        static_cast<std::uint32_t>(get_uint(root, src, "", "eval_every", cfg.eval_every, UINT32_MAX));
    cfg.eval_fraction = get_number(root, src, "", "eval_fraction", cfg.eval_fraction);
    cfg.metrics_window = static_cast<std::uint32_t>(
        get_uint(root, src, "", "metrics_window", cfg.metrics_window, UINT32_MAX));
    cfg.seed = get_uint(root, src, "", "seed", cfg.seed);
    cfg.threads =
        static_cast<std::uint32_t>(get_uint(root, src, "", "threads", cfg.threads, UINT32_MAX));
    if (seed_override) cfg.seed = *seed_override;

    const std::string accounting = get_string(root, src, "", "accounting", "formula");
    if (accounting == "formula") {
        cfg.accounting = EnergyAccounting::kFormula;
    } else if (accounting == "measured") {
        cfg.accounting = EnergyAccounting::kMeasured;
    } else {
        fail(src, "accounting", "must be formula or measured");
    }

    const json& task = get_object(root, src, "", "task");
    check_keys(task, src, "task",
               {"num_clusters", "clients_per_cluster", "classes_per_cluster", "input_dim",
                "samples_per_client", "class_separation", "noise_sigma", "seed"});
    cfg.task.num_clusters = static_cast<std::uint32_t>(
        get_uint(task, src, "task", "num_clusters", cfg.task.num_clusters, UINT32_MAX));
    cfg.task.clients_per_cluster = static_cast<std::uint32_t>(get_uint(
        task, src, "task", "clients_per_cluster", cfg.task.clients_per_cluster, UINT32_MAX));
    auto label_sets = get_label_sets(task, src, "task", "classes_per_cluster");
    cfg.task.classes_per_cluster =
        label_sets.empty() ? default_label_sets(cfg.task.num_clusters) : std::move(label_sets);
    cfg.task.input_dim = static_cast<std::uint32_t>(
        get_uint(task, src, "task", "input_dim", cfg.task.input_dim, UINT32_MAX));
    cfg.task.samples_per_client = static_cast<std::uint32_t>(
        get_uint(task, src, "task", "samples_per_client", cfg.task.samples_per_client, UINT32_MAX));
    cfg.task.class_separation =
        get_number(task, src, "task", "class_separation", cfg.task.class_separation);
    cfg.task.noise_sigma = get_number(task, src, "task", "noise_sigma", cfg.task.noise_sigma);
    cfg.task.seed = get_uint(task, src, "task", "seed", cfg.seed); // defaults to the run seed

    const json& model = get_object(root, src, "", "model");
    check_keys(model, src, "model", {"kind", "hidden_dim"});
    const std::string kind = get_string(model, src, "model", "kind", "softmax");
    if (kind == "softmax") {
        cfg.model.kind = ModelKind::kSoftmax;
    } else if (kind == "mlp") {
        cfg.model.kind = ModelKind::kMlp;
    } else {
        fail(src, "model.kind", "must be softmax or mlp");
    }
    const std::uint64_t default_hidden = cfg.model.kind == ModelKind::kMlp ? 16 : 0;
    cfg.model.hidden_dim = static_cast<std::uint32_t>(
        get_uint(model, src, "model", "hidden_dim", default_hidden, UINT32_MAX));
    // Input width and class count always come from the task definition.
    cfg.model.input_dim = cfg.task.input_dim;
    cfg.model.num_classes = cfg.task.num_classes();

    const json& train = get_object(root, src, "", "train");
    check_keys(train, src, "train", {"learning_rate", "batch_size", "batches", "epochs"});
    cfg.train.learning_rate =
        get_number(train, src, "train", "learning_rate", cfg.train.learning_rate);
    cfg.train.batch_size = static_cast<std::uint32_t>(
        get_uint(train, src, "train", "batch_size", cfg.train.batch_size, UINT32_MAX));
    cfg.train.batches = static_cast<std::uint32_t>(
        get_uint(train, src, "train", "batches", cfg.train.batches, UINT32_MAX));
    cfg.train.epochs = static_cast<std::uint32_t>(
        get_uint(train, src, "train", "epochs", cfg.train.epochs, UINT32_MAX));

    const json& walk = get_object(root, src, "", "walk");
    check_keys(walk, src, "walk", {"alpha", "ref_walks", "start_depth"});
    cfg.walk.alpha = get_number(walk, src, "walk", "alpha", cfg.walk.alpha);
    cfg.walk.ref_walks = static_cast<std::uint32_t>(
        get_uint(walk, src, "walk", "ref_walks", cfg.walk.ref_walks, UINT32_MAX));
    cfg.walk.start_depth = static_cast<std::uint32_t>(
        get_uint(walk, src, "walk", "start_depth", cfg.walk.start_depth, UINT32_MAX));

    const json& trigger = get_object(root, src, "", "trigger");
    check_keys(trigger, src, "trigger", {"threshold"});
    cfg.trigger.threshold = get_number(trigger, src, "trigger", "threshold", cfg.trigger.threshold);
    switch (cfg.variant) {
    case Variant::kSdagfl: cfg.trigger.mode = PublishMode::kReferenceBaseline; break;
    case Variant::kEsdagfl: cfg.trigger.mode = PublishMode::kEventTriggered; break;
    case Variant::kAlwaysPublish: cfg.trigger.mode = PublishMode::kAlwaysPublish; break;
    }

    const json& cost = get_object(root, src, "", "cost");
    check_keys(cost, src, "cost",
               {"capacitance", "cpu_freq", "eval_cycles", "agg_cycles", "train_cycles_per_sample",
                "confidence_cycles", "rating_cycles", "avg_children"});
    cfg.cost.capacitance = get_number(cost, src, "cost", "capacitance", cfg.cost.capacitance);
    cfg.cost.cpu_freq = get_number(cost, src, "cost", "cpu_freq", cfg.cost.cpu_freq);
    cfg.cost.eval_cycles = get_number(cost, src, "cost", "eval_cycles", cfg.cost.eval_cycles);
    cfg.cost.agg_cycles = get_number(cost, src, "cost", "agg_cycles", cfg.cost.agg_cycles);
    cfg.cost.train_cycles_per_sample =
        get_number(cost, src, "cost", "train_cycles_per_sample", cfg.cost.train_cycles_per_sample);
    cfg.cost.confidence_cycles =
        get_number(cost, src, "cost", "confidence_cycles", cfg.cost.confidence_cycles);
    cfg.cost.rating_cycles = get_number(cost, src, "cost", "rating_cycles", cfg.cost.rating_cycles);
    cfg.cost.avg_children = get_number(cost, src, "cost", "avg_children", cfg.cost.avg_children);
    // Walk-shaped cost symbols always mirror the walk config.
    cfg.cost.walk_depth = cfg.walk.start_depth;
    cfg.cost.ref_walks = cfg.walk.ref_walks;

    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(source_name + ": " + e.what());
    }

    return finalize_config(std::move(cfg));
}

LoadedConfig finalize_config(SimConfig sim) {
    LoadedConfig out;
    out.sim = std::move(sim);
    out.resolved_json = config_to_json(out.sim);
    out.hash_hex = to_hex(fnv1a(out.resolved_json));
    return out;
}

LoadedConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw IoError("cannot read config file: " + path);
    return parse_config(buffer.str(), path, seed_override);
}

} // namespace tanglefl
