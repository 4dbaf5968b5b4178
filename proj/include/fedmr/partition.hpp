#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedmr/dataset.hpp"

namespace fedmr {

struct PartitionSpec {
    enum class Scheme { iid, dirichlet };
    Scheme scheme = Scheme::iid;
    double alpha = 0.5; // dirichlet concentration, > 0
    int num_clients = 1;
    int min_samples_per_client = 2;
};

struct ClientShard {
    int client_id = 0;
    Dataset data;
};

// Per-client sample indices. Shards are disjoint and cover the dataset;
// every client ends with at least min_samples_per_client samples.
// Dirichlet proportions are drawn per class over clients.
std::vector<std::vector<std::size_t>> partition_indices(const Dataset& dataset, const PartitionSpec& spec,
                                                        std::uint64_t seed);

std::vector<ClientShard> make_shards(const Dataset& dataset, const std::vector<std::vector<std::size_t>>& indices);

// JSON manifest (client_id -> sample indices) for reproducibility audits.
std::string partition_manifest_json(const PartitionSpec& spec, std::uint64_t seed,
                                    const std::vector<std::vector<std::size_t>>& indices);

} // namespace fedmr
