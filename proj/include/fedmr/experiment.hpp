#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedmr/dataset.hpp"
#include "fedmr/fed.hpp"
#include "fedmr/partition.hpp"

namespace fedmr {

enum class Algorithm { fedmr, fedavg, fedprox, fedmr_no_mr };

const char* algorithm_name(Algorithm a);

struct SeedPack {
    std::uint64_t init = 1;
    std::uint64_t data = 2;
    std::uint64_t sampling = 3;
    std::uint64_t recombine = 4;
};

struct ModelSpec {
    enum class Kind { mlp, cnn };
    Kind kind = Kind::mlp;
    std::vector<int> hidden = {64, 32};       // mlp
    std::vector<int> conv_channels = {8, 16}; // cnn
    int kernel = 3;
    int pool = 2;
    int dense_hidden = 64;
};

// Builds a model matching the dataset's feature shape and class count.
LayeredModel build_model(const ModelSpec& spec, const std::vector<std::size_t>& feature_shape, int classes,
                         std::uint64_t seed);

struct ExperimentConfig {
    Algorithm algorithm = Algorithm::fedmr;
    int num_clients = 10;
    double participation_fraction = 0.1;
    int rounds = 10;
    int pretrain_rounds = 0; // two-stage switch point; 0 = pure recombination
    int eval_every = 1;
    bool identical_init = false;
    int threads = 1;
    LocalTrainConfig local;
    ModelSpec model;
    SeedPack seeds;

    // K = max(1, round(participation_fraction * N))
    int participants() const;
    void validate() const;
};

struct RoundRecord {
    int round = 0;
    std::string stage; // "pretrain" while the round operator is aggregation, "recombine" after
    std::vector<int> clients;
    std::vector<double> client_loss;
    bool evaluated = false;
    double accuracy = 0.0;
    double loss = 0.0;
    int transfers = 0; // models moved this round: K down + K up
    std::vector<std::vector<int>> layer_perms; // recombination rounds
    std::vector<int> dispatch_perm;            // no-MR rounds
    double wall_ms = 0.0;
};

// Deterministic-field equality; wall clock time is excluded.
bool records_equal(const RoundRecord& a, const RoundRecord& b);

struct RunResult {
    std::vector<RoundRecord> records;
    LayeredModel final_model;
    double final_accuracy = 0.0;
    double final_loss = 0.0;
};

// K distinct ids drawn uniformly without replacement, deterministic per
// (seed, round). K == N returns all clients in sorted order.
std::vector<int> sample_clients(int num_clients, int k, std::uint64_t seed, int round);

// Runs the full round loop: sample K clients, train the list models on them
// (optionally across threads; results merge in list order), apply the round
// operator for the configured algorithm, and score the intermediate global
// model (uniform average of the current list) against the test set.
RunResult run_experiment(const ExperimentConfig& cfg, const std::vector<ClientShard>& shards, const Dataset& test);

} // namespace fedmr
