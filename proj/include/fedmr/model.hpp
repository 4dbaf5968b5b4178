#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fedmr/tensor.hpp"

namespace fedmr {

enum class LayerKind { dense, conv2d, relu, flatten, maxpool2d, softmax_output };

const char* layer_kind_name(LayerKind kind);

// One model layer. Only dense and conv2d carry parameters; the rest are
// constant and keep empty weight/bias tensors so layer indices stay aligned
// when models are decomposed into blocks.
struct Layer {
    LayerKind kind = LayerKind::relu;
    Tensor weight; // dense: (fan_out, fan_in); conv2d: (out_c, in_c, kh, kw)
    Tensor bias;   // dense/conv2d: (fan_out)
    int stride = 1; // conv2d, maxpool2d
    int pool = 2;   // maxpool2d window

    bool has_params() const { return kind == LayerKind::dense || kind == LayerKind::conv2d; }

    static Layer dense(std::size_t fan_in, std::size_t fan_out);
    static Layer conv2d(std::size_t in_c, std::size_t out_c, int kernel, int stride = 1);
    static Layer relu() { return Layer{LayerKind::relu, {}, {}, 1, 2}; }
    static Layer flatten() { return Layer{LayerKind::flatten, {}, {}, 1, 2}; }
    static Layer maxpool2d(int pool = 2, int stride = 0); // stride 0 -> same as pool
    static Layer softmax_output() { return Layer{LayerKind::softmax_output, {}, {}, 1, 2}; }
};

// Ordered layer sequence. Two models are recombination-compatible iff their
// architecture_id strings match (same kinds, shapes and order).
struct LayeredModel {
    std::vector<Layer> layers;
    std::string architecture_id;

    std::size_t param_count() const;
    int num_classes() const; // fan_out of the last dense layer

    // Visits every parameter tensor in layer order (weight before bias).
    template <typename F>
    void for_each_param(F&& f) {
        for (Layer& l : layers) {
            if (!l.has_params()) continue;
            f(l.weight);
            f(l.bias);
        }
    }
    template <typename F>
    void for_each_param(F&& f) const {
        for (const Layer& l : layers) {
            if (!l.has_params()) continue;
            f(l.weight);
            f(l.bias);
        }
    }

    void refresh_architecture_id();
};

std::string architecture_signature(const std::vector<Layer>& layers);
bool models_bit_equal(const LayeredModel& a, const LayeredModel& b);

// Seeded He-style fan-in uniform init on every parameterized layer,
// biases zeroed.
void init_params(LayeredModel& model, std::uint64_t seed);

struct MlpSpec {
    std::size_t input_features = 2;
    std::vector<int> hidden = {32, 16};
    int classes = 2;
};

struct CnnSpec {
    std::size_t in_channels = 1;
    std::size_t height = 28;
    std::size_t width = 28;
    std::vector<int> conv_channels = {8, 16};
    int kernel = 3;
    int pool = 2;
    int dense_hidden = 64;
    int classes = 10;
};

// flatten -> [dense -> relu]* -> dense -> softmax
LayeredModel make_mlp(const MlpSpec& spec, std::uint64_t seed);
// [conv -> relu -> maxpool]* -> flatten -> dense -> relu -> dense -> softmax
LayeredModel make_cnn(const CnnSpec& spec, std::uint64_t seed);

// Per-layer activation record kept for the backward pass.
struct ForwardTrace {
    std::vector<Tensor> inputs;                    // input seen by each layer
    std::vector<std::vector<std::size_t>> argmax;  // maxpool winners, per layer
    Tensor output;                                 // model output (probabilities when softmax-terminated)
    Tensor log_probs;                              // filled when the last layer is softmax_output
};

ForwardTrace forward_trace(const LayeredModel& model, const Tensor& batch_x);

// Runs the layer stack; returns per-class probabilities when the model ends
// in softmax_output, raw activations otherwise.
Tensor forward(const LayeredModel& model, const Tensor& batch_x);

// Parameter gradients, mirroring the model layout. Entries for
// parameterless layers stay empty.
struct ParamGrads {
    std::vector<Tensor> weight;
    std::vector<Tensor> bias;

    static ParamGrads zeros_like(const LayeredModel& model);
    void scale(double s);
};

// Mean cross-entropy over the batch plus gradients w.r.t. every parameter.
// Requires a softmax_output-terminated model and labels < num_classes.
std::pair<double, ParamGrads> loss_and_grad(const LayeredModel& model, const Tensor& batch_x,
                                            const std::vector<int>& batch_y);

struct EvalResult {
    double accuracy = 0.0;
    double mean_loss = 0.0;
};

// Argmax accuracy and mean cross-entropy over a full dataset, evaluated in
// fixed-size chunks so memory stays bounded.
EvalResult evaluate(const LayeredModel& model, const Tensor& xs, const std::vector<int>& ys);

} // namespace fedmr
