#include "tanglefl/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "tanglefl/matrix_io.hpp"
#include "tanglefl/rng.hpp"

namespace tanglefl {

namespace {

// Fixed stream ids keep data generation independent of any other rng usage.
constexpr std::uint64_t kCentroidStream = 0xC3A7B01D;
constexpr std::uint64_t kClientStreamBase = 0xDA7A0000;

} // namespace

void ClusterTaskConfig::validate() const {
    if (num_clusters == 0 || clients_per_cluster == 0) {
        throw ConfigError("task: num_clusters and clients_per_cluster must be >= 1");
    }
    if (classes_per_cluster.size() != num_clusters) {
        throw ConfigError("task: classes_per_cluster must list one label set per cluster");
    }
    std::set<std::uint32_t> seen;
    std::size_t total_labels = 0;
    for (const auto& labels : classes_per_cluster) {
        if (labels.empty()) throw ConfigError("task: empty label set");
        total_labels += labels.size();
        seen.insert(labels.begin(), labels.end());
    }
    if (seen.size() != total_labels) {
        throw ConfigError("task: label sets must be pairwise disjoint");
    }
    if (seen.size() < 2) throw ConfigError("task: need at least 2 classes overall");
    if (input_dim == 0) throw ConfigError("task: input_dim must be >= 1");
    if (samples_per_client < 2) {
        throw ConfigError("task: samples_per_client must be >= 2 for a 9:1 split");
    }
    if (!(class_separation > 0.0) || !std::isfinite(class_separation)) {
        throw ConfigError("task: class_separation must be positive and finite");
    }
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
        throw ConfigError("task: noise_sigma must be nonnegative and finite");
    }
}

std::uint32_t ClusterTaskConfig::num_classes() const {
    std::uint32_t max_label = 0;
    for (const auto& labels : classes_per_cluster) {
        for (std::uint32_t y : labels) max_label = std::max(max_label, y);
    }
    return max_label + 1;
}

namespace {

// Centroids on a sphere of radius class_separation with random directions;
// candidates closer than class_separation to an existing centroid are
// redrawn, growing the radius if directions keep colliding.
std::vector<std::vector<double>> place_centroids(const ClusterTaskConfig& cfg,
                                                 const std::vector<std::uint32_t>& labels) {
    RngStream rng(cfg.seed, kCentroidStream);
    std::vector<std::vector<double>> centroids(cfg.num_classes());
    std::vector<const std::vector<double>*> placed;
    for (std::uint32_t label : labels) {
        double radius = cfg.class_separation;
        std::vector<double> candidate(cfg.input_dim);
        for (std::uint32_t attempt = 0;; ++attempt) {
            double norm_sq = 0.0;
            for (auto& v : candidate) {
                v = rng.normal();
                norm_sq += v * v;
            }
            const double scale = radius / std::sqrt(std::max(norm_sq, 1e-300));
            for (auto& v : candidate) v *= scale;
            bool ok = true;
            for (const auto* other : placed) {
                double dist_sq = 0.0;
                for (std::size_t j = 0; j < candidate.size(); ++j) {
                    const double d = candidate[j] - (*other)[j];
                    dist_sq += d * d;
                }
                if (dist_sq < cfg.class_separation * cfg.class_separation) {
                    ok = false;
                    break;
                }
            }
            if (ok) break;
            if (attempt > 0 && attempt % 100 == 0) radius *= 1.25;
        }
        centroids[label] = candidate;
        placed.push_back(&centroids[label]);
    }
    return centroids;
}

} // namespace

std::vector<ClientData> generate(const ClusterTaskConfig& cfg) {
    cfg.validate();

    std::vector<std::uint32_t> all_labels;
    for (const auto& labels : cfg.classes_per_cluster) {
        all_labels.insert(all_labels.end(), labels.begin(), labels.end());
    }
    std::sort(all_labels.begin(), all_labels.end());
    const auto centroids = place_centroids(cfg, all_labels);

    std::vector<ClientData> clients;
    clients.reserve(cfg.total_clients());
    for (std::uint32_t cluster = 0; cluster < cfg.num_clusters; ++cluster) {
        const auto& label_set = cfg.classes_per_cluster[cluster];
        for (std::uint32_t k = 0; k < cfg.clients_per_cluster; ++k) {
            const ClientId id = cluster * cfg.clients_per_cluster + k;
            RngStream rng(cfg.seed, kClientStreamBase + id);

            const std::uint32_t n = cfg.samples_per_client;
            std::vector<double> features(static_cast<std::size_t>(n) * cfg.input_dim);
            std::vector<std::uint32_t> labels(n);
            for (std::uint32_t i = 0; i < n; ++i) {
                const std::uint32_t y = label_set[rng.uniform_below(label_set.size())];
                labels[i] = y;
                const auto& centroid = centroids[y];
                double* row = features.data() + static_cast<std::size_t>(i) * cfg.input_dim;
                for (std::uint32_t j = 0; j < cfg.input_dim; ++j) {
                    row[j] = centroid[j] + cfg.noise_sigma * rng.normal();
                }
            }

            // 9:1 split over a seeded shuffle; the test side never rounds
            // down to zero.
            std::vector<std::uint32_t> order(n);
            std::iota(order.begin(), order.end(), 0u);
            rng.shuffle(order);
            const std::uint32_t test_n = std::max(1u, n / 10);
            const std::uint32_t train_n = n - test_n;

            ClientData client;
            client.id = id;
            client.cluster = cluster;
            client.train.input_dim = cfg.input_dim;
            client.test.input_dim = cfg.input_dim;
            for (std::uint32_t i = 0; i < n; ++i) {
                DatasetShard& shard = i < train_n ? client.train : client.test;
                const std::uint32_t src = order[i];
                const double* row = features.data() + static_cast<std::size_t>(src) * cfg.input_dim;
                shard.features.insert(shard.features.end(), row, row + cfg.input_dim);
                shard.labels.push_back(labels[src]);
            }
            clients.push_back(std::move(client));
        }
    }
    return clients;
}

void export_dataset(const std::filesystem::path& matrix_path,
                    const std::filesystem::path& manifest_path,
                    std::span<const ClientData> clients) {
    if (clients.empty()) throw std::invalid_argument("export_dataset: no clients");
    const std::uint32_t dim = clients.front().train.input_dim;

    std::vector<double> rows;
    nlohmann::json manifest;
    manifest["input_dim"] = dim;
    manifest["clients"] = nlohmann::json::array();
    std::uint32_t row_count = 0;
    for (const ClientData& c : clients) {
        for (const DatasetShard* shard : {&c.train, &c.test}) {
            for (std::size_t i = 0; i < shard->size(); ++i) {
                const auto row = shard->row(i);
                rows.insert(rows.end(), row.begin(), row.end());
                rows.push_back(static_cast<double>(shard->labels[i]));
            }
        }
        manifest["clients"].push_back({{"client", c.id},
                                       {"cluster", c.cluster},
                                       {"train_rows", c.train.size()},
                                       {"test_rows", c.test.size()}});
        row_count += static_cast<std::uint32_t>(c.train.size() + c.test.size());
    }
    write_matrix(matrix_path, row_count, dim + 1, rows);

    std::ofstream out(manifest_path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + manifest_path.string());
    out << manifest.dump(2) << "\n";
}

std::vector<ClientData> import_dataset(const std::filesystem::path& matrix_path,
                                       const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw std::runtime_error("cannot open for reading: " + manifest_path.string());
    const nlohmann::json manifest = nlohmann::json::parse(in);
    const MatrixFile matrix = read_matrix(matrix_path);
    const std::uint32_t dim = manifest.at("input_dim").get<std::uint32_t>();
    if (matrix.cols != dim + 1) throw std::runtime_error("dataset matrix has wrong width");

    std::vector<ClientData> clients;
    std::size_t cursor = 0;
    for (const auto& entry : manifest.at("clients")) {
        ClientData c;
        c.id = entry.at("client").get<ClientId>();
        c.cluster = entry.at("cluster").get<std::uint32_t>();
        c.train.input_dim = dim;
        c.test.input_dim = dim;
        for (auto [shard, key] : {std::pair{&c.train, "train_rows"}, {&c.test, "test_rows"}}) {
            const auto count = entry.at(key).get<std::size_t>();
            for (std::size_t i = 0; i < count; ++i, ++cursor) {
                const double* row = matrix.values.data() + cursor * matrix.cols;
                shard->features.insert(shard->features.end(), row, row + dim);
                shard->labels.push_back(static_cast<std::uint32_t>(row[dim]));
            }
        }
        clients.push_back(std::move(c));
    }
    if (cursor != matrix.rows) throw std::runtime_error("dataset matrix has extra rows");
    return clients;
}

} // namespace tanglefl
