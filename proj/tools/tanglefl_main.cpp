#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tanglefl/config.hpp"
#include "tanglefl/report.hpp"
#include "tanglefl/sim.hpp"

namespace fs = std::filesystem;

namespace {

using namespace tanglefl;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool has_seed = false;
    bool quiet = false;

    std::optional<std::uint64_t> seed_override() const {
        return has_seed ? std::optional<std::uint64_t>(seed) : std::nullopt;
    }
};

std::optional<std::uint32_t> env_threads() {
    const char* value = std::getenv("TANGLEFL_THREADS");
    if (!value || !*value) return std::nullopt;
    char* end = nullptr;
    const unsigned long parsed = std::strtoul(value, &end, 10);
    if (end == value || *end != '\0' || parsed > UINT32_MAX)
        throw ConfigError("TANGLEFL_THREADS must be a non-negative integer (0 = auto)");
    return static_cast<std::uint32_t>(parsed);
}

LoadedConfig load_for(const CommonArgs& args) {
    LoadedConfig cfg = load_config(args.config_path, args.seed_override());
    if (const auto threads = env_threads()) cfg.sim.threads = *threads;
    return cfg;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_run_artifacts(const fs::path& dir, const LoadedConfig& cfg, const SimResult& res) {
    ensure_dir(dir);
    write_file(dir / "rounds.csv", rounds_csv(res.records));
    write_file(dir / "energy.csv", energy_csv(res.energy));
    const std::string summary = summary_json(cfg, res);
    if (const std::string err = validate_schema(summary, summary_schema_text()); !err.empty())
        throw std::runtime_error("internal: summary.json violates its schema: " + err);
    write_file(dir / "summary.json", summary);
    write_file(dir / "curves.svg", curves_svg(res.records));
}

void print_result_line(const char* label, const LoadedConfig& cfg, const SimResult& res) {
    const RoundRecord& last = res.records.back();
    std::cout << label << " seed=" << cfg.sim.seed << " hash=" << cfg.hash_hex
              << ": accuracy=" << format_double(last.mean_accuracy)
              << " loss=" << format_double(last.mean_loss)
              << " pureness=" << format_double(last.pureness) << " modules=" << last.modules
              << " publish_rate=" << format_double(last.publish_rate)
              << " energy=" << format_double(res.energy.total()) << "\n";
}

int cmd_run(const CommonArgs& args) {
    const LoadedConfig cfg = load_for(args);
    const SimResult res = run(cfg.sim);
    write_run_artifacts(args.out_dir, cfg, res);
    if (!args.quiet) {
        print_result_line(variant_name(cfg.sim.variant), cfg, res);
        std::cout << "artifacts: " << args.out_dir
                  << "/{rounds.csv,energy.csv,summary.json,curves.svg}\n";
    }
    return 0;
}

int cmd_compare(const CommonArgs& args) {
    const LoadedConfig cfg = load_for(args);

    SimConfig base = cfg.sim;
    base.variant = Variant::kSdagfl;
    base.trigger.mode = PublishMode::kReferenceBaseline;
    SimConfig trig = cfg.sim;
    trig.variant = Variant::kEsdagfl;
    trig.trigger.mode = PublishMode::kEventTriggered;

    const LoadedConfig base_cfg = finalize_config(std::move(base));
    const LoadedConfig trig_cfg = finalize_config(std::move(trig));
    const SimResult base_res = run(base_cfg.sim);
    const SimResult trig_res = run(trig_cfg.sim);

    const fs::path out(args.out_dir);
    write_run_artifacts(out / "sdagfl", base_cfg, base_res);
    write_run_artifacts(out / "esdagfl", trig_cfg, trig_res);
    write_file(out / "compare.csv", compare_csv(base_res.energy, trig_res.energy));

    const double base_total = base_res.energy.total();
    const double trig_total = trig_res.energy.total();
    const double reference_total = base_res.energy.total_reference();
    const double difference = base_total - trig_total;
    const double rel_err = reference_total != 0.0
                               ? std::abs(difference - reference_total) / std::abs(reference_total)
                               : std::abs(difference);
    const double reduction = base_total != 0.0 ? (1.0 - trig_total / base_total) * 100.0 : 0.0;
    const double base_time = base_res.energy.total_tip_time();
    const double trig_time = trig_res.energy.total_tip_time();
    const double time_reduction = base_time != 0.0 ? (1.0 - trig_time / base_time) * 100.0 : 0.0;

    nlohmann::json j;
    j["seed"] = cfg.sim.seed;
    j["sdagfl_total_energy"] = base_total;
    j["esdagfl_total_energy"] = trig_total;
    j["energy_reduction_percent"] = reduction;
    j["sdagfl_reference_energy"] = reference_total;
    j["energy_difference"] = difference;
    j["difference_vs_reference_rel_error"] = rel_err;
    j["sdagfl_total_tip_time"] = base_time;
    j["esdagfl_total_tip_time"] = trig_time;
    j["tip_time_reduction_percent"] = time_reduction;
    j["sdagfl_final_accuracy"] = base_res.records.back().mean_accuracy;
    j["esdagfl_final_accuracy"] = trig_res.records.back().mean_accuracy;
    j["sdagfl_final_loss"] = base_res.records.back().mean_loss;
    j["esdagfl_final_loss"] = trig_res.records.back().mean_loss;
    write_file(out / "compare.json", j.dump(2) + "\n");

    if (!args.quiet) {
        print_result_line("sdagfl", base_cfg, base_res);
        print_result_line("esdagfl", trig_cfg, trig_res);
        std::cout << "energy reduction: " << format_double(reduction)
                  << "% (sdagfl=" << format_double(base_total)
                  << ", esdagfl=" << format_double(trig_total) << ")\n";
    }
    return 0;
}

std::vector<double> parse_thresholds(const std::string& csv) {
    std::vector<double> out;
    std::size_t begin = 0;
    while (begin <= csv.size()) {
        std::size_t end = csv.find(',', begin);
        if (end == std::string::npos) end = csv.size();
        const std::string token = csv.substr(begin, end - begin);
        if (token.empty())
            throw ConfigError("sweep: empty threshold in list \"" + csv + "\"");
        try {
            std::size_t used = 0;
            const double value = std::stod(token, &used);
            if (used != token.size()) throw std::invalid_argument(token);
            out.push_back(value);
        } catch (const std::exception&) {
            throw ConfigError("sweep: cannot parse threshold \"" + token + "\" as a number");
        }
        if (end == csv.size()) break;
        begin = end + 1;
    }
    if (out.empty()) throw ConfigError("sweep: at least one threshold is required");
    return out;
}

int cmd_sweep(const CommonArgs& args, const std::string& thresholds_csv) {
    const LoadedConfig cfg = load_for(args);
    const std::vector<double> thresholds = parse_thresholds(thresholds_csv);
    const std::vector<SweepRow> rows = sweep_threshold(cfg.sim, thresholds);
    ensure_dir(args.out_dir);
    write_file(fs::path(args.out_dir) / "sweep.csv", sweep_csv(rows));
    if (!args.quiet) {
        for (const SweepRow& r : rows) {
            std::cout << "threshold=" << format_double(r.threshold)
                      << " accuracy=" << format_double(r.final_accuracy)
                      << " pureness=" << format_double(r.pureness)
                      << " publish_rate=" << format_double(r.publish_rate)
                      << " energy=" << format_double(r.total_energy) << "\n";
        }
    }
    return 0;
}

int cmd_export_ledger(const CommonArgs& args) {
    const LoadedConfig cfg = load_for(args);
    const SimResult res = run(cfg.sim);
    ensure_dir(args.out_dir);
    const fs::path out(args.out_dir);
    export_ledger(res.ledger, out / "ledger.ndjson", out / "ledger_payloads.bin");
    if (!args.quiet) {
        std::cout << "exported " << res.ledger.node_count() << " nodes to " << args.out_dir
                  << "/{ledger.ndjson,ledger_payloads.bin}\n";
    }
    return 0;
}

template <typename F>
int guarded(F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_out = true) {
    cmd->add_option("--config", args.config_path, "JSON config file")->required();
    auto* out = cmd->add_option("--out", args.out_dir, "output directory");
    if (needs_out) out->required();
    cmd->add_option("--seed", args.seed, "override the config seed")
        ->check(CLI::NonNegativeNumber)
        ->each([&args](const std::string&) { args.has_seed = true; });
    cmd->add_flag("--quiet", args.quiet, "suppress the stdout report");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tanglefl: specializing DAG federated learning simulator with "
                 "event-triggered communication"};
    app.require_subcommand(1);
    app.footer(
        "Output columns:\n"
        "  rounds.csv : round, mean_accuracy, mean_loss, modularity, modules, pureness,\n"
        "               publish_rate, cum_energy (one row per evaluation round)\n"
        "  energy.csv : round, client, e_tip, e_agg, e_train, e_ref, e_total, t_tip\n"
        "  sweep.csv  : threshold, final_accuracy, final_loss, pureness, publish_rate,\n"
        "               total_energy\n"
        "  compare.csv: round, sdagfl_cum_energy, esdagfl_cum_energy, sdagfl_cum_time,\n"
        "               esdagfl_cum_time, sdagfl_cum_reference\n"
        "  summary.json (schema: schemas/summary.schema.json), curves.svg\n"
        "  ledger.ndjson: one {id, parents, publisher, round} object per node;\n"
        "  ledger_payloads.bin: little-endian float64 matrix, one row per node\n"
        "Environment:\n"
        "  TANGLEFL_THREADS caps client-level parallelism (0 = auto)\n"
        "Exit codes: 0 ok, 2 config error, 3 io error");

    CommonArgs run_args, compare_args, sweep_args, export_args;
    std::string thresholds_csv;

    CLI::App* run_cmd =
        app.add_subcommand("run", "run one simulation and write its artifacts");
    add_common(run_cmd, run_args);

    CLI::App* compare_cmd = app.add_subcommand(
        "compare", "run sdagfl and esdagfl on the same seed and report the energy reduction");
    add_common(compare_cmd, compare_args);

    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "run one esdagfl simulation per trigger threshold");
    add_common(sweep_cmd, sweep_args);
    sweep_cmd->add_option("--thresholds", thresholds_csv, "comma-separated threshold list")
        ->required();

    CLI::App* export_cmd = app.add_subcommand(
        "export-ledger", "run one simulation and export the final DAG ledger");
    add_common(export_cmd, export_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (run_cmd->parsed()) return guarded([&] { return cmd_run(run_args); });
    if (compare_cmd->parsed()) return guarded([&] { return cmd_compare(compare_args); });
    if (sweep_cmd->parsed()) return guarded([&] { return cmd_sweep(sweep_args, thresholds_csv); });
    if (export_cmd->parsed()) return guarded([&] { return cmd_export_ledger(export_args); });
    return 2;
}
