#include "fedmr/optim.hpp"

#include <cmath>

#include "fedmr/error.hpp"

namespace fedmr {

SgdMomentum SgdMomentum::for_model(const LayeredModel& model, double lr, double mu) {
    if (lr < 0.0) fail(ErrorCode::invalid_argument, "learning rate must be non-negative");
    if (mu < 0.0 || mu >= 1.0) fail(ErrorCode::invalid_argument, "momentum must lie in [0, 1)");
    SgdMomentum opt;
    opt.learning_rate = lr;
    opt.momentum = mu;
    opt.vel_weight.resize(model.layers.size());
    opt.vel_bias.resize(model.layers.size());
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        if (!model.layers[i].has_params()) continue;
        opt.vel_weight[i] = Tensor(model.layers[i].weight.shape);
        opt.vel_bias[i] = Tensor(model.layers[i].bias.shape);
    }
    return opt;
}

namespace {

void step_tensors(Tensor& param, const Tensor& grad, Tensor& vel, double lr, double mu) {
    if (!param.same_shape(grad) || !param.same_shape(vel)) {
        fail(ErrorCode::shape_mismatch, "sgd step: param " + shape_to_string(param.shape) + ", grad " +
                                            shape_to_string(grad.shape) + ", velocity " + shape_to_string(vel.shape));
    }
    for (std::size_t i = 0; i < param.data.size(); ++i) {
        vel.data[i] = mu * vel.data[i] + grad.data[i];
        param.data[i] -= lr * vel.data[i];
    }
}

} // namespace

void SgdMomentum::step(LayeredModel& model, const ParamGrads& grads) {
    if (grads.weight.size() != model.layers.size() || vel_weight.size() != model.layers.size()) {
        fail(ErrorCode::shape_mismatch, "sgd step: grads/velocity do not mirror the model layout");
    }
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        if (!model.layers[i].has_params()) continue;
        step_tensors(model.layers[i].weight, grads.weight[i], vel_weight[i], learning_rate, momentum);
        step_tensors(model.layers[i].bias, grads.bias[i], vel_bias[i], learning_rate, momentum);
    }
    for (const Layer& l : model.layers) {
        if (!l.has_params()) continue;
        l.weight.ensure_finite("sgd step weight");
        l.bias.ensure_finite("sgd step bias");
    }
}

} // namespace fedmr
