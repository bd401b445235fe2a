#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tanglefl/common.hpp"
#include "tanglefl/model.hpp"

namespace tanglefl {

/// Synthetic clustered task: each cluster owns a disjoint label set, every
/// client in a cluster samples only from that set, and each label is a
/// Gaussian blob around its own centroid.
struct ClusterTaskConfig {
    std::uint32_t num_clusters = 3;
    std::uint32_t clients_per_cluster = 10;
    std::vector<std::vector<std::uint32_t>> classes_per_cluster = {
        {0, 1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
    std::uint32_t input_dim = 16;
    std::uint32_t samples_per_client = 200;
    double class_separation = 6.0; // minimum centroid distance
    double noise_sigma = 1.0;
    std::uint64_t seed = 42;

    void validate() const;
    std::uint32_t num_classes() const; // max label + 1
    std::uint32_t total_clients() const { return num_clusters * clients_per_cluster; }
};

struct ClientData {
    ClientId id = 0;
    std::uint32_t cluster = 0;
    DatasetShard train;
    DatasetShard test;
};

/// Deterministically generates all client shards (9:1 train/test split per
/// client). Same seed, same bytes.
std::vector<ClientData> generate(const ClusterTaskConfig& cfg);

/// Writes all shards as one little-endian float64 matrix (row = features
/// then label) plus a JSON manifest describing per-client row counts.
void export_dataset(const std::filesystem::path& matrix_path,
                    const std::filesystem::path& manifest_path,
                    std::span<const ClientData> clients);

/// Inverse of export_dataset; reconstructs shards bit for bit.
std::vector<ClientData> import_dataset(const std::filesystem::path& matrix_path,
                                       const std::filesystem::path& manifest_path);

} // namespace tanglefl
