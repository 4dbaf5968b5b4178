#pragma once

#include "fedmr/model.hpp"

namespace fedmr {

// Classical SGD with momentum:  v' = mu * v + g,  p' = p - lr * v'.
// Velocity tensors mirror the model parameter shapes exactly.
struct SgdMomentum {
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::vector<Tensor> vel_weight;
    std::vector<Tensor> vel_bias;

    static SgdMomentum for_model(const LayeredModel& model, double lr, double mu);

    // Updates the model in place. Throws on any shape mismatch between
    // params, grads and velocity.
    void step(LayeredModel& model, const ParamGrads& grads);
};

} // namespace fedmr
