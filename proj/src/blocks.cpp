#include "fedmr/blocks.hpp"

#include "fedmr/error.hpp"

namespace fedmr {

bool LayerBlock::params_bit_equal(const LayerBlock& other) const {
    if (params.size() != other.params.size()) return false;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!bit_equal(params[i], other.params[i])) return false;
    }
    return true;
}

LayerTable decompose(const std::vector<LayeredModel>& models) {
    if (models.empty()) fail(ErrorCode::invalid_argument, "decompose: need at least one model");
    const std::string& arch = models[0].architecture_id;
    for (std::size_t j = 1; j < models.size(); ++j) {
        if (models[j].architecture_id != arch) {
            fail(ErrorCode::invalid_argument,
                 "decompose: model " + std::to_string(j) + " architecture '" + models[j].architecture_id +
                     "' does not match model 0 '" + arch + "'");
        }
    }

    LayerTable table;
    table.architecture_id = arch;
    table.prototype = models[0];
    std::size_t n = models[0].layers.size();
    table.lists.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        table.lists[k].reserve(models.size());
        for (std::size_t j = 0; j < models.size(); ++j) {
            LayerBlock block;
            block.layer_index = static_cast<int>(k);
            block.source_model = static_cast<int>(j);
            const Layer& l = models[j].layers[k];
            if (l.has_params()) {
                block.params = {l.weight, l.bias};
            }
            table.lists[k].push_back(std::move(block));
        }
    }
    return table;
}

std::vector<LayeredModel> reassemble(const LayerTable& table) {
    std::size_t n = table.prototype.layers.size();
    if (table.lists.size() != n) {
        fail(ErrorCode::invalid_argument, "reassemble: table has " + std::to_string(table.lists.size()) +
                                              " lists but the architecture has " + std::to_string(n) + " layers");
    }
    std::size_t k_models = table.num_models();
    if (k_models == 0) fail(ErrorCode::invalid_argument, "reassemble: empty table");
    for (std::size_t k = 0; k < n; ++k) {
        if (table.lists[k].size() != k_models) {
            fail(ErrorCode::invalid_argument, "reassemble: list " + std::to_string(k) + " has " +
                                                  std::to_string(table.lists[k].size()) + " blocks, expected " +
                                                  std::to_string(k_models));
        }
    }

    std::vector<LayeredModel> models(k_models, table.prototype);
    for (std::size_t j = 0; j < k_models; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            const LayerBlock& block = table.lists[k][j];
            Layer& dst = models[j].layers[k];
            if (!dst.has_params()) {
                if (!block.params.empty()) {
                    fail(ErrorCode::invalid_argument, "reassemble: block at layer " + std::to_string(k) +
                                                          " carries params for a parameterless layer");
                }
                continue;
            }
            if (block.params.size() != 2) {
                fail(ErrorCode::invalid_argument, "reassemble: block at layer " + std::to_string(k) +
                                                      " must carry weight and bias");
            }
            if (block.params[0].shape != dst.weight.shape || block.params[1].shape != dst.bias.shape) {
                fail(ErrorCode::shape_mismatch, "reassemble: block shape at layer " + std::to_string(k) +
                                                    " does not match the architecture");
            }
            dst.weight = block.params[0];
            dst.bias = block.params[1];
        }
    }
    return models;
}

} // namespace fedmr
