#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedmr/model.hpp"
#include "fedmr/tensor.hpp"

namespace fedmr {

struct Dataset {
    Tensor xs;            // (num_samples, feature dims...)
    std::vector<int> ys;  // class labels, < num_classes
    int num_classes = 0;

    std::size_t size() const { return ys.size(); }
    std::size_t sample_stride() const { return ys.empty() ? 0 : xs.size() / ys.size(); }

    // Feature dims without the sample dimension.
    std::vector<std::size_t> feature_shape() const;

    Dataset subset(const std::vector<std::size_t>& indices) const;
};

EvalResult evaluate(const LayeredModel& model, const Dataset& dataset);

struct SyntheticSpec {
    enum class Kind { blobs, spiral };
    Kind kind = Kind::blobs;
    std::size_t samples = 1000;
    int classes = 2;
    std::size_t features = 2; // spiral is inherently 2-D
    double noise = 0.1;
    std::uint64_t seed = 0;       // fixes the class structure (blob centers / spiral geometry)
    std::uint64_t draw_nonce = 0; // distinguishes draws from the same structure (train vs test)
};

// Deterministic multiclass toy data. Labels cycle 0,1,...,C-1 so class
// counts match the requested proportions exactly.
Dataset generate_synthetic(const SyntheticSpec& spec);

// IDX (MNIST-style) loader: big-endian headers, magic 0x00000803 for images
// and 0x00000801 for labels. Pixels are scaled to [0,1]; images come out as
// (n, 1, rows, cols).
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

} // namespace fedmr
