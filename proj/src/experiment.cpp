#include "fedmr/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <numeric>

#include "fedmr/error.hpp"
#include "fedmr/rng.hpp"

namespace fedmr {

const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::fedmr: return "fedmr";
        case Algorithm::fedavg: return "fedavg";
        case Algorithm::fedprox: return "fedprox";
        case Algorithm::fedmr_no_mr: return "fedmr_no_mr";
    }
    return "?";
}

LayeredModel build_model(const ModelSpec& spec, const std::vector<std::size_t>& feature_shape, int classes,
                         std::uint64_t seed) {
    if (spec.kind == ModelSpec::Kind::mlp) {
        MlpSpec mlp;
        mlp.input_features = shape_product(feature_shape);
        mlp.hidden = spec.hidden;
        mlp.classes = classes;
        return make_mlp(mlp, seed);
    }
    if (feature_shape.size() != 3) {
        fail(ErrorCode::invalid_argument,
             "cnn model needs (channels, height, width) samples, got feature shape " + shape_to_string(feature_shape));
    }
    CnnSpec cnn;
    cnn.in_channels = feature_shape[0];
    cnn.height = feature_shape[1];
    cnn.width = feature_shape[2];
    cnn.conv_channels = spec.conv_channels;
    cnn.kernel = spec.kernel;
    cnn.pool = spec.pool;
    cnn.dense_hidden = spec.dense_hidden;
    cnn.classes = classes;
    return make_cnn(cnn, seed);
}

int ExperimentConfig::participants() const {
    int k = static_cast<int>(std::lround(participation_fraction * num_clients));
    return std::max(1, k);
}

void ExperimentConfig::validate() const {
    if (num_clients < 1) fail(ErrorCode::validation_error, "num_clients must be >= 1");
    if (participation_fraction <= 0.0 || participation_fraction > 1.0) {
        fail(ErrorCode::validation_error, "participation_fraction must lie in (0, 1]");
    }
    if (rounds < 0) fail(ErrorCode::validation_error, "rounds must be >= 0");
    if (pretrain_rounds < 0 || pretrain_rounds > rounds) {
        fail(ErrorCode::validation_error, "pretrain_rounds must lie in [0, rounds]");
    }
    if (eval_every < 1) fail(ErrorCode::validation_error, "eval_every must be >= 1");
    if (threads < 1) fail(ErrorCode::validation_error, "threads must be >= 1");
    if (participants() > num_clients) fail(ErrorCode::validation_error, "participants exceed num_clients");
    if (local.epochs < 1) fail(ErrorCode::validation_error, "local.epochs must be >= 1");
    if (local.batch_size < 1) fail(ErrorCode::validation_error, "local.batch_size must be >= 1");
    if (local.learning_rate < 0.0) fail(ErrorCode::validation_error, "local.learning_rate must be >= 0");
    if (local.momentum < 0.0 || local.momentum >= 1.0) fail(ErrorCode::validation_error, "local.momentum must lie in [0, 1)");
    if (local.prox_mu < 0.0) fail(ErrorCode::validation_error, "local.prox_mu must be >= 0");
}

bool records_equal(const RoundRecord& a, const RoundRecord& b) {
    return a.round == b.round && a.stage == b.stage && a.clients == b.clients && a.client_loss == b.client_loss &&
           a.evaluated == b.evaluated && a.accuracy == b.accuracy && a.loss == b.loss && a.transfers == b.transfers &&
           a.layer_perms == b.layer_perms && a.dispatch_perm == b.dispatch_perm;
}

std::vector<int> sample_clients(int num_clients, int k, std::uint64_t seed, int round) {
    if (k < 1 || k > num_clients) {
        fail(ErrorCode::invalid_argument, "sample_clients: K = " + std::to_string(k) + " outside [1, " +
                                              std::to_string(num_clients) + "]");
    }
    std::vector<int> ids(static_cast<std::size_t>(num_clients));
    std::iota(ids.begin(), ids.end(), 0);
    if (k == num_clients) return ids; // full participation: keep index order

    auto rng = make_rng(sampling_seed(seed, round));
    for (int i = 0; i < k; ++i) {
        std::uniform_int_distribution<int> pick(i, num_clients - 1);
        std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(pick(rng))]);
    }
    ids.resize(static_cast<std::size_t>(k));
    return ids;
}

namespace {

struct TrainedClient {
    LayeredModel model;
    double loss = 0.0;
};

// Fans the K local updates out over a small pool. Every client update is a
// pure function of (model, shard, seed), so the merge in client-list order
// makes the result schedule-independent.
std::vector<TrainedClient> train_round(const std::vector<LayeredModel>& dispatch,
                                       const std::vector<ClientShard>& shards, const std::vector<int>& clients,
                                       const LocalTrainConfig& local, std::uint64_t data_seed, int round,
                                       int threads) {
    std::size_t k = clients.size();
    std::vector<TrainedClient> out(k);
    auto train_one = [&](std::size_t i) {
        std::uint64_t seed = batch_order_seed(data_seed, round, clients[i]);
        ClientUpdateResult r = client_update(dispatch[i], shards[static_cast<std::size_t>(clients[i])], local, seed);
        out[i] = TrainedClient{std::move(r.model), r.mean_loss};
    };

    if (threads <= 1 || k <= 1) {
        for (std::size_t i = 0; i < k; ++i) train_one(i);
        return out;
    }
    std::vector<std::future<void>> jobs;
    jobs.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        jobs.push_back(std::async(std::launch::async, train_one, i));
    }
    for (auto& j : jobs) j.get();
    return out;
}

} // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const std::vector<ClientShard>& shards, const Dataset& test) {
    cfg.validate();
    if (shards.size() != static_cast<std::size_t>(cfg.num_clients)) {
        fail(ErrorCode::validation_error, "run_experiment: " + std::to_string(shards.size()) + " shards for " +
                                              std::to_string(cfg.num_clients) + " clients");
    }
    if (test.size() == 0) fail(ErrorCode::validation_error, "run_experiment: empty test set");
    for (const ClientShard& s : shards) {
        if (s.data.size() == 0) {
            fail(ErrorCode::validation_error, "run_experiment: client " + std::to_string(s.client_id) + " has no data");
        }
    }

    int k_participants = cfg.participants();
    const std::vector<std::size_t> feature_shape = test.feature_shape();

    ModelList list;
    list.entries.reserve(static_cast<std::size_t>(k_participants));
    for (int i = 0; i < k_participants; ++i) {
        std::uint64_t seed = model_init_seed(cfg.seeds.init, cfg.identical_init ? 0 : i);
        list.entries.push_back(build_model(cfg.model, feature_shape, test.num_classes, seed));
    }

    RunResult result;
    result.records.reserve(static_cast<std::size_t>(cfg.rounds));

    for (int r = 1; r <= cfg.rounds; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        RoundRecord rec;
        rec.round = r;
        rec.clients = sample_clients(cfg.num_clients, k_participants, cfg.seeds.sampling, r);
        rec.transfers = 2 * k_participants; // K dispatched + K uploaded

        std::vector<TrainedClient> trained =
            train_round(list.entries, shards, rec.clients, cfg.local, cfg.seeds.data, r, cfg.threads);
        for (std::size_t i = 0; i < trained.size(); ++i) {
            list.entries[i] = std::move(trained[i].model);
            rec.client_loss.push_back(trained[i].loss);
        }

        // Round operator. fedavg/fedprox aggregate every round; the
        // recombination algorithms aggregate while r <= pretrain_rounds
        // (two-stage scheme) and shuffle afterwards.
        bool aggregation_round = cfg.algorithm == Algorithm::fedavg || cfg.algorithm == Algorithm::fedprox ||
                                 r <= cfg.pretrain_rounds;
        rec.stage = aggregation_round ? "pretrain" : "recombine";
        if (aggregation_round) {
            LayeredModel aggregate = fedavg_aggregate(list.entries);
            for (auto& entry : list.entries) entry = aggregate;
        } else if (cfg.algorithm == Algorithm::fedmr) {
            RecombineResult rr = model_recombine(list.entries, recombine_seed(cfg.seeds.recombine, r));
            list.entries = std::move(rr.models);
            rec.layer_perms = std::move(rr.layer_perms);
        } else { // fedmr_no_mr
            DispatchResult dr = dispatch_no_recombine(list.entries, recombine_seed(cfg.seeds.recombine, r));
            list.entries = std::move(dr.models);
            rec.dispatch_perm = std::move(dr.perm);
        }
        list.round = r;

        if (r % cfg.eval_every == 0 || r == cfg.rounds) {
            // Learning curves are scored with the intermediate global model,
            // the uniform average of the current list.
            EvalResult ev = evaluate(global_model_gen(list.entries), test);
            rec.evaluated = true;
            rec.accuracy = ev.accuracy;
            rec.loss = ev.mean_loss;
        }
        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        result.records.push_back(std::move(rec));
    }

    result.final_model = global_model_gen(list.entries);
    EvalResult final_ev = evaluate(result.final_model, test);
    result.final_accuracy = final_ev.accuracy;
    result.final_loss = final_ev.mean_loss;
    return result;
}

} // namespace fedmr
