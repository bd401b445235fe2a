#include "tanglefl/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "tanglefl/matrix_io.hpp"

namespace tanglefl {

using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

/// RFC-4180: quote fields containing comma, quote or newline.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string quoted = "\"";
    for (const char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

void append_row(std::string& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_field(fields[i]);
    }
    out += '\n';
}

} // namespace

std::string rounds_csv(const std::vector<RoundRecord>& records) {
    std::string out;
    append_row(out, {"round", "mean_accuracy", "mean_loss", "modularity", "modules", "pureness",
                     "publish_rate", "cum_energy"});
    for (const RoundRecord& r : records) {
        append_row(out, {std::to_string(r.round), format_double(r.mean_accuracy),
                         format_double(r.mean_loss), format_double(r.modularity),
                         std::to_string(r.modules), format_double(r.pureness),
                         format_double(r.publish_rate), format_double(r.cumulative_energy)});
    }
    return out;
}

std::string energy_csv(const EnergyLedger& energy) {
    std::string out;
    append_row(out, {"round", "client", "e_tip", "e_agg", "e_train", "e_ref", "e_total", "t_tip"});
    for (const EnergyRow& r : energy.rows()) {
        append_row(out, {std::to_string(r.round), std::to_string(r.client), format_double(r.tip),
                         format_double(r.aggregation), format_double(r.training),
                         format_double(r.reference), format_double(r.total),
                         format_double(r.tip_time)});
    }
    return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out;
    append_row(out, {"threshold", "final_accuracy", "final_loss", "pureness", "publish_rate",
                     "total_energy"});
    for (const SweepRow& r : rows) {
        append_row(out, {format_double(r.threshold), format_double(r.final_accuracy),
                         format_double(r.final_loss), format_double(r.pureness),
                         format_double(r.publish_rate), format_double(r.total_energy)});
    }
    return out;
}

std::string compare_csv(const EnergyLedger& baseline, const EnergyLedger& triggered) {
    struct PerRound {
        double energy = 0.0;
        double time = 0.0;
        double reference = 0.0;
    };
    std::map<std::uint32_t, PerRound> base, trig;
    for (const EnergyRow& r : baseline.rows()) {
        PerRound& p = base[r.round];
        p.energy += r.total;
        p.time += r.tip_time;
        p.reference += r.reference;
    }
    for (const EnergyRow& r : triggered.rows()) {
        PerRound& p = trig[r.round];
        p.energy += r.total;
        p.time += r.tip_time;
    }

    std::string out;
    append_row(out, {"round", "sdagfl_cum_energy", "esdagfl_cum_energy", "sdagfl_cum_time",
                     "esdagfl_cum_time", "sdagfl_cum_reference"});
    std::map<std::uint32_t, bool> rounds;
    for (const auto& [round, unused] : base) rounds[round] = true;
    for (const auto& [round, unused] : trig) rounds[round] = true;
    PerRound cb, ct;
    for (const auto& [round, unused] : rounds) {
        if (const auto it = base.find(round); it != base.end()) {
            cb.energy += it->second.energy;
            cb.time += it->second.time;
            cb.reference += it->second.reference;
        }
        if (const auto it = trig.find(round); it != trig.end()) {
            ct.energy += it->second.energy;
            ct.time += it->second.time;
        }
        append_row(out, {std::to_string(round), format_double(cb.energy),
                         format_double(ct.energy), format_double(cb.time),
                         format_double(ct.time), format_double(cb.reference)});
    }
    return out;
}

std::string summary_json(const LoadedConfig& cfg, const SimResult& result) {
    json j;
    j["config"] = json::parse(cfg.resolved_json);
    j["config_hash"] = cfg.hash_hex;
    j["variant"] = variant_name(cfg.sim.variant);
    j["rounds_completed"] = cfg.sim.rounds;

    RoundRecord last;
    if (!result.records.empty()) last = result.records.back();
    json& final_block = j["final"];
    final_block["round"] = last.round;
    final_block["mean_accuracy"] = last.mean_accuracy;
    final_block["mean_loss"] = last.mean_loss;
    final_block["modularity"] = last.modularity;
    final_block["modules"] = last.modules;
    final_block["pureness"] = last.pureness;
    final_block["publish_rate"] = last.publish_rate;

    json& energy = j["energy"];
    energy["total"] = result.energy.total();
    energy["tip"] = result.energy.total_tip();
    energy["aggregation"] = result.energy.total_aggregation();
    energy["training"] = result.energy.total_training();
    energy["reference"] = result.energy.total_reference();
    energy["tip_time"] = result.energy.total_tip_time();

    json& objective = j["objective"];
    objective["expected_reference_energy"] = result.energy.total_reference();
    objective["final_loss"] = last.mean_loss;

    j["publishes"] = result.publishes;
    j["selections"] = result.selections;
    return j.dump(2) + "\n";
}

const std::string& summary_schema_text() {
    static const std::string schema = R"({
  "type": "object",
  "required": ["config", "config_hash", "variant", "rounds_completed", "final", "energy", "objective", "publishes", "selections"],
  "additionalProperties": false,
  "properties": {
    "config": {"type": "object"},
    "config_hash": {"type": "string"},
    "variant": {"type": "string", "enum": ["sdagfl", "esdagfl", "always_publish"]},
    "rounds_completed": {"type": "integer"},
    "final": {
      "type": "object",
      "required": ["round", "mean_accuracy", "mean_loss", "modularity", "modules", "pureness", "publish_rate"],
      "additionalProperties": false,
      "properties": {
        "round": {"type": "integer"},
        "mean_accuracy": {"type": "number"},
        "mean_loss": {"type": "number"},
        "modularity": {"type": "number"},
        "modules": {"type": "integer"},
        "pureness": {"type": "number"},
        "publish_rate": {"type": "number"}
      }
    },
    "energy": {
      "type": "object",
      "required": ["total", "tip", "aggregation", "training", "reference", "tip_time"],
      "additionalProperties": false,
      "properties": {
        "total": {"type": "number"},
        "tip": {"type": "number"},
        "aggregation": {"type": "number"},
        "training": {"type": "number"},
        "reference": {"type": "number"},
        "tip_time": {"type": "number"}
      }
    },
    "objective": {
      "type": "object",
      "required": ["expected_reference_energy", "final_loss"],
      "additionalProperties": false,
      "properties": {
        "expected_reference_energy": {"type": "number"},
        "final_loss": {"type": "number"}
      }
    },
    "publishes": {"type": "integer"},
    "selections": {"type": "integer"}
  }
}
)";
    return schema;
}

namespace {

std::string json_type_name(const json& v) {
    if (v.is_object()) return "object";
    if (v.is_array()) return "array";
    if (v.is_string()) return "string";
    if (v.is_boolean()) return "boolean";
    if (v.is_null()) return "null";
    if (v.is_number_integer() || v.is_number_unsigned()) return "integer";
    return "number";
}

bool type_matches(const std::string& want, const json& v) {
    if (want == "number") return v.is_number();
    if (want == "integer") return v.is_number_integer() || v.is_number_unsigned();
    return want == json_type_name(v);
}

std::string check_node(const json& inst, const json& schema, const std::string& path) {
    if (const auto it = schema.find("type"); it != schema.end()) {
        const auto want = it->get<std::string>();
        if (!type_matches(want, inst))
            return path + ": expected " + want + ", got " + json_type_name(inst);
    }
    if (const auto it = schema.find("enum"); it != schema.end()) {
        if (std::none_of(it->begin(), it->end(), [&](const json& v) { return v == inst; }))
            return path + ": value not in enum";
    }
    if (inst.is_object()) {
        if (const auto req = schema.find("required"); req != schema.end()) {
            for (const json& name : *req) {
                if (!inst.contains(name.get<std::string>()))
                    return path + ": missing required member \"" + name.get<std::string>() + "\"";
            }
        }
        const auto props = schema.find("properties");
        if (const auto extra = schema.find("additionalProperties");
            extra != schema.end() && extra->is_boolean() && !extra->get<bool>() &&
            props != schema.end()) {
            for (const auto& [key, unused] : inst.items()) {
                if (!props->contains(key)) return path + ": unexpected member \"" + key + "\"";
            }
        }
        if (props != schema.end()) {
            for (const auto& [key, sub] : props->items()) {
                if (!inst.contains(key)) continue;
                if (auto err = check_node(inst.at(key), sub, path + "." + key); !err.empty())
                    return err;
            }
        }
    }
    if (inst.is_array()) {
        if (const auto items = schema.find("items"); items != schema.end()) {
            for (std::size_t i = 0; i < inst.size(); ++i) {
                if (auto err = check_node(inst[i], *items, path + "[" + std::to_string(i) + "]");
                    !err.empty())
                    return err;
            }
        }
    }
    return "";
}

} // namespace

std::string validate_schema(const std::string& instance_json, const std::string& schema_json) {
    json inst, schema;
    try {
        inst = json::parse(instance_json);
    } catch (const json::parse_error& e) {
        return std::string("instance is not valid JSON: ") + e.what();
    }
    try {
        schema = json::parse(schema_json);
    } catch (const json::parse_error& e) {
        return std::string("schema is not valid JSON: ") + e.what();
    }
    return check_node(inst, schema, "$");
}

namespace {

struct Series {
    std::vector<std::pair<double, double>> points; // (round, value)
    const char* color;
    const char* label;
};

std::string coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

void svg_panel(std::string& out, double ox, double oy, const char* title,
               const std::vector<Series>& series) {
    constexpr double kW = 480, kH = 360;
    constexpr double kLeft = 64, kRight = 18, kTop = 44, kBottom = 40;
    const double plot_w = kW - kLeft - kRight;
    const double plot_h = kH - kTop - kBottom;

    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool any = false;
    for (const Series& s : series) {
        for (const auto& [x, y] : s.points) {
            if (!any) {
                xmin = xmax = x;
                ymin = ymax = y;
                any = true;
            } else {
                xmin = std::min(xmin, x);
                xmax = std::max(xmax, x);
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
        }
    }
    if (xmax - xmin < 1e-12) xmax = xmin + 1;
    if (ymax - ymin < 1e-12) ymax = ymin + 1;

    const auto px = [&](double x) { return ox + kLeft + (x - xmin) / (xmax - xmin) * plot_w; };
    const auto py = [&](double y) { return oy + kTop + (1.0 - (y - ymin) / (ymax - ymin)) * plot_h; };

    out += "<text x=\"" + coord(ox + kW / 2) + "\" y=\"" + coord(oy + 24) +
           "\" text-anchor=\"middle\" font-size=\"15\" font-family=\"sans-serif\">" + title +
           "</text>\n";
    out += "<rect x=\"" + coord(ox + kLeft) + "\" y=\"" + coord(oy + kTop) + "\" width=\"" +
           coord(plot_w) + "\" height=\"" + coord(plot_h) +
           "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
    // Corner labels: x range on the bottom, y range on the left.
    out += "<text x=\"" + coord(ox + kLeft) + "\" y=\"" + coord(oy + kH - 14) +
           "\" font-size=\"11\" font-family=\"sans-serif\">" + format_double(xmin) + "</text>\n";
    out += "<text x=\"" + coord(ox + kW - kRight) + "\" y=\"" + coord(oy + kH - 14) +
           "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" +
           format_double(xmax) + "</text>\n";
    out += "<text x=\"" + coord(ox + kLeft - 6) + "\" y=\"" + coord(oy + kTop + 10) +
           "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" +
           format_double(ymax) + "</text>\n";
    out += "<text x=\"" + coord(ox + kLeft - 6) + "\" y=\"" + coord(oy + kTop + plot_h) +
           "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" +
           format_double(ymin) + "</text>\n";

    double legend_y = oy + 36;
    for (const Series& s : series) {
        if (s.points.size() == 1) {
            out += "<circle cx=\"" + coord(px(s.points[0].first)) + "\" cy=\"" +
                   coord(py(s.points[0].second)) + "\" r=\"3\" fill=\"" + s.color + "\"/>\n";
        } else if (!s.points.empty()) {
            out += "<polyline fill=\"none\" stroke=\"" + std::string(s.color) +
                   "\" stroke-width=\"1.5\" points=\"";
            for (const auto& [x, y] : s.points) out += coord(px(x)) + "," + coord(py(y)) + " ";
            out += "\"/>\n";
        }
        if (series.size() > 1) {
            out += "<text x=\"" + coord(ox + kW - kRight) + "\" y=\"" + coord(legend_y) +
                   "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\" fill=\"" +
                   s.color + "\">" + s.label + "</text>\n";
            legend_y += 13;
        }
    }
}

} // namespace

std::string curves_svg(const std::vector<RoundRecord>& records) {
    std::string out =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"720\" "
        "viewBox=\"0 0 960 720\">\n<rect width=\"960\" height=\"720\" fill=\"white\"/>\n";

    Series acc{{}, "#1f77b4", "accuracy"};
    Series lss{{}, "#d62728", "loss"};
    Series mod{{}, "#2ca02c", "modularity"};
    Series pure{{}, "#ff7f0e", "pureness"};
    Series en{{}, "#555555", "energy"};
    for (const RoundRecord& r : records) {
        const auto x = static_cast<double>(r.round);
        acc.points.emplace_back(x, r.mean_accuracy);
        lss.points.emplace_back(x, r.mean_loss);
        mod.points.emplace_back(x, r.modularity);
        pure.points.emplace_back(x, r.pureness);
        en.points.emplace_back(x, r.cumulative_energy);
    }

    if (records.empty()) {
        out += "<text x=\"480\" y=\"360\" text-anchor=\"middle\" font-size=\"16\" "
               "font-family=\"sans-serif\">no evaluation rounds recorded</text>\n";
    } else {
        svg_panel(out, 0, 0, "sampled mean accuracy", {acc});
        svg_panel(out, 480, 0, "sampled mean loss", {lss});
        svg_panel(out, 0, 360, "specialization", {mod, pure});
        svg_panel(out, 480, 360, "cumulative energy", {en});
    }
    out += "</svg>\n";
    return out;
}

std::string ledger_ndjson(const DagLedger& ledger) {
    std::string out;
    for (const Transaction& tx : ledger.nodes()) {
        json row;
        row["id"] = tx.id;
        row["parents"] = tx.parents;
        row["publisher"] = tx.publisher;
        row["round"] = tx.round;
        out += row.dump();
        out += '\n';
    }
    return out;
}

void export_ledger(const DagLedger& ledger, const std::filesystem::path& ndjson_path,
                   const std::filesystem::path& payload_path) {
    write_file(ndjson_path, ledger_ndjson(ledger));

    const std::size_t dim = ledger.payload_dim();
    std::vector<double> values;
    values.reserve(ledger.node_count() * dim);
    for (const Transaction& tx : ledger.nodes())
        values.insert(values.end(), tx.payload.values().begin(), tx.payload.values().end());
    write_matrix(payload_path, static_cast<std::uint32_t>(ledger.node_count()),
                 static_cast<std::uint32_t>(dim), values);
}

DagLedger import_ledger(const std::filesystem::path& ndjson_path,
                        const std::filesystem::path& payload_path) {
    std::ifstream in(ndjson_path, std::ios::binary);
    if (!in) throw IoError("cannot read ledger file: " + ndjson_path.string());
    const MatrixFile payloads = read_matrix(payload_path);

    std::vector<Transaction> txs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json row;
        try {
            row = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ConfigError(ndjson_path.string() + ": bad ledger row: " + e.what());
        }
        Transaction tx;
        tx.id = row.at("id").get<NodeId>();
        tx.parents = row.at("parents").get<std::vector<NodeId>>();
        tx.publisher = row.at("publisher").get<ClientId>();
        tx.round = row.at("round").get<std::uint32_t>();
        if (tx.id >= payloads.rows)
            throw ShapeError("ledger payload matrix has fewer rows than transactions");
        const auto begin = payloads.values.begin() +
                           static_cast<std::ptrdiff_t>(tx.id * payloads.cols);
        tx.payload = ParamVector(std::vector<double>(begin, begin + payloads.cols));
        txs.push_back(std::move(tx));
    }
    if (txs.size() != payloads.rows)
        throw ShapeError("ledger payload matrix row count does not match transaction count");
    return DagLedger::restore(std::move(txs));
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

} // namespace tanglefl
