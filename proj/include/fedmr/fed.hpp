#pragma once

#include <cstdint>
#include <vector>

#include "fedmr/model.hpp"
#include "fedmr/partition.hpp"

namespace fedmr {

// The server-side list L_m of the K models kept between rounds.
struct ModelList {
    std::vector<LayeredModel> entries;
    int round = 0;

    std::size_t size() const { return entries.size(); }
};

struct LocalTrainConfig {
    int epochs = 5;
    int batch_size = 50;
    double learning_rate = 0.01;
    double momentum = 0.9;
    double prox_mu = 0.0; // 0 disables the proximal term
};

struct ClientUpdateResult {
    LayeredModel model;
    double mean_loss = 0.0; // mean batch loss over the final local epoch
};

// Local training: cfg.epochs passes of mini-batch SGD with momentum over the
// shard, starting from model_in (which is left untouched). Optimizer
// velocity starts at zero on every call. When prox_mu > 0 the gradient is
// augmented with mu * (w - w_in), the FedProx correction toward the
// dispatched model.
ClientUpdateResult client_update(const LayeredModel& model_in, const ClientShard& shard,
                                 const LocalTrainConfig& cfg, std::uint64_t shuffle_seed);

struct RecombineResult {
    std::vector<LayeredModel> models;
    // layer_perms[k][j] = index of the input model that contributed layer k
    // of output model j. Each row is a permutation of {0..K-1}.
    std::vector<std::vector<int>> layer_perms;
};

// Model recombination: decompose the K models into per-layer lists, shuffle
// each list with an independent seeded permutation, reassemble. Every layer
// block ends up in exactly one output model.
RecombineResult model_recombine(const std::vector<LayeredModel>& models, std::uint64_t seed);

// Parameter-wise weighted mean. Null weights means uniform 1/K.
LayeredModel fedavg_aggregate(const std::vector<LayeredModel>& models,
                              const std::vector<double>* weights = nullptr);

// Uniform average of the final local models; inference-only output of the
// whole training run.
LayeredModel global_model_gen(const std::vector<LayeredModel>& models);

struct DispatchResult {
    std::vector<LayeredModel> models;
    std::vector<int> perm; // perm[j] = source index of output model j
};

// Ablation operator: permutes whole models uniformly at random, with no
// layer mixing and no aggregation.
DispatchResult dispatch_no_recombine(const std::vector<LayeredModel>& models, std::uint64_t seed);

// Uniform Fisher-Yates permutation of {0..n-1}.
std::vector<int> random_permutation(std::size_t n, std::mt19937_64& rng);

} // namespace fedmr
