#pragma once

#include <vector>

#include "fedmr/model.hpp"

namespace fedmr {

// One layer's full parameter set, tagged with where it sits and which model
// it came from. Weight and bias travel together; parameterless layers keep
// an empty params vector so indices stay aligned with the architecture.
struct LayerBlock {
    int layer_index = 0;
    int source_model = 0;
    std::vector<Tensor> params; // canonical order: weight, bias

    bool params_bit_equal(const LayerBlock& other) const;
};

// lists[k][j] holds layer k of model j (before any shuffling). The prototype
// keeps the shared hyperparameters so models can be rebuilt from blocks.
struct LayerTable {
    std::string architecture_id;
    LayeredModel prototype;
    std::vector<std::vector<LayerBlock>> lists;

    std::size_t num_layers() const { return lists.size(); }
    std::size_t num_models() const { return lists.empty() ? 0 : lists[0].size(); }
};

// Splits K compatible models into an n-list table of layer blocks.
// Throws naming the first model whose architecture diverges.
LayerTable decompose(const std::vector<LayeredModel>& models);

// Inverse of decompose: model j's layer k = lists[k][j]. Validates table
// shape and per-block parameter shapes.
std::vector<LayeredModel> reassemble(const LayerTable& table);

} // namespace fedmr
