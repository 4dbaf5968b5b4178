#include "fedmr/fed.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>
#include <random>

#include "fedmr/blocks.hpp"
#include "fedmr/error.hpp"
#include "fedmr/optim.hpp"
#include "fedmr/rng.hpp"

namespace fedmr {

ClientUpdateResult client_update(const LayeredModel& model_in, const ClientShard& shard,
                                 const LocalTrainConfig& cfg, std::uint64_t shuffle_seed) {
    if (shard.data.size() == 0) {
        fail(ErrorCode::invalid_argument, "client_update: client " + std::to_string(shard.client_id) + " has no data");
    }
    if (cfg.epochs < 1 || cfg.batch_size < 1) {
        fail(ErrorCode::invalid_argument, "client_update: epochs and batch_size must be positive");
    }

    LayeredModel model = model_in;
    SgdMomentum opt = SgdMomentum::for_model(model, cfg.learning_rate, cfg.momentum);

    std::size_t n = shard.data.size();
    std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n);
    std::size_t stride = shard.data.sample_stride();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto rng = make_rng(shuffle_seed);

    std::vector<std::size_t> batch_shape = shard.data.xs.shape;
    double last_epoch_loss = 0.0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += batch) {
            std::size_t count = std::min(batch, n - start);
            batch_shape[0] = count;
            Tensor bx(batch_shape);
            std::vector<int> by(count);
            for (std::size_t i = 0; i < count; ++i) {
                std::size_t src = order[start + i];
                std::memcpy(&bx.data[i * stride], &shard.data.xs.data[src * stride], stride * sizeof(double));
                by[i] = shard.data.ys[src];
            }
            auto [loss, grads] = loss_and_grad(model, bx, by);
            if (cfg.prox_mu > 0.0) {
                for (std::size_t li = 0; li < model.layers.size(); ++li) {
                    if (!model.layers[li].has_params()) continue;
                    const Layer& cur = model.layers[li];
                    const Layer& ref = model_in.layers[li];
                    for (std::size_t i = 0; i < cur.weight.data.size(); ++i) {
                        grads.weight[li].data[i] += cfg.prox_mu * (cur.weight.data[i] - ref.weight.data[i]);
                    }
                    for (std::size_t i = 0; i < cur.bias.data.size(); ++i) {
                        grads.bias[li].data[i] += cfg.prox_mu * (cur.bias.data[i] - ref.bias.data[i]);
                    }
                }
            }
            opt.step(model, grads);
            epoch_loss += loss;
            ++batches;
        }
        last_epoch_loss = epoch_loss / static_cast<double>(batches);
    }
    return ClientUpdateResult{std::move(model), last_epoch_loss};
}

std::vector<int> random_permutation(std::size_t n, std::mt19937_64& rng) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i-- > 1;) {
        std::uniform_int_distribution<std::size_t> pick(0, i);
        std::swap(perm[i], perm[pick(rng)]);
    }
    return perm;
}

RecombineResult model_recombine(const std::vector<LayeredModel>& models, std::uint64_t seed) {
    LayerTable table = decompose(models); // validates compatibility
    std::size_t k_models = table.num_models();
    auto rng = make_rng(seed);

    RecombineResult result;
    result.layer_perms.reserve(table.num_layers());
    for (std::size_t k = 0; k < table.num_layers(); ++k) {
        std::vector<int> perm = random_permutation(k_models, rng);
        std::vector<LayerBlock> shuffled(k_models);
        for (std::size_t j = 0; j < k_models; ++j) {
            shuffled[j] = std::move(table.lists[k][static_cast<std::size_t>(perm[j])]);
        }
        table.lists[k] = std::move(shuffled);
        result.layer_perms.push_back(std::move(perm));
    }
    result.models = reassemble(table);
    return result;
}

LayeredModel fedavg_aggregate(const std::vector<LayeredModel>& models, const std::vector<double>* weights) {
    if (models.empty()) fail(ErrorCode::invalid_argument, "fedavg_aggregate: empty model list");
    const std::string& arch = models[0].architecture_id;
    for (std::size_t j = 1; j < models.size(); ++j) {
        if (models[j].architecture_id != arch) {
            fail(ErrorCode::invalid_argument, "fedavg_aggregate: model " + std::to_string(j) + " architecture mismatch");
        }
    }

    std::vector<double> norm(models.size(), 1.0 / static_cast<double>(models.size()));
    if (weights != nullptr) {
        if (weights->size() != models.size()) {
            fail(ErrorCode::invalid_argument, "fedavg_aggregate: " + std::to_string(weights->size()) +
                                                  " weights for " + std::to_string(models.size()) + " models");
        }
        double total = 0.0;
        for (double w : *weights) {
            if (w < 0.0) fail(ErrorCode::invalid_argument, "fedavg_aggregate: weights must be non-negative");
            total += w;
        }
        if (total <= 0.0) fail(ErrorCode::invalid_argument, "fedavg_aggregate: weights must sum to a positive value");
        for (std::size_t j = 0; j < models.size(); ++j) norm[j] = (*weights)[j] / total;
    }

    LayeredModel out = models[0];
    for (Layer& l : out.layers) {
        if (!l.has_params()) continue;
        l.weight.fill(0.0);
        l.bias.fill(0.0);
    }
    for (std::size_t j = 0; j < models.size(); ++j) {
        for (std::size_t li = 0; li < out.layers.size(); ++li) {
            if (!out.layers[li].has_params()) continue;
            const Layer& src = models[j].layers[li];
            Layer& dst = out.layers[li];
            for (std::size_t i = 0; i < dst.weight.data.size(); ++i) dst.weight.data[i] += norm[j] * src.weight.data[i];
            for (std::size_t i = 0; i < dst.bias.data.size(); ++i) dst.bias.data[i] += norm[j] * src.bias.data[i];
        }
    }
    return out;
}

LayeredModel global_model_gen(const std::vector<LayeredModel>& models) {
    return fedavg_aggregate(models, nullptr);
}

DispatchResult dispatch_no_recombine(const std::vector<LayeredModel>& models, std::uint64_t seed) {
    if (models.empty()) fail(ErrorCode::invalid_argument, "dispatch_no_recombine: empty model list");
    auto rng = make_rng(seed);
    DispatchResult result;
    result.perm = random_permutation(models.size(), rng);
    result.models.reserve(models.size());
    for (std::size_t j = 0; j < models.size(); ++j) {
        result.models.push_back(models[static_cast<std::size_t>(result.perm[j])]);
    }
    return result;
}

} // namespace fedmr
