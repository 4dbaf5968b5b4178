#include "fedmr/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "fedmr/error.hpp"
#include "fedmr/rng.hpp"

namespace fedmr {

namespace {

inline std::size_t idx4(std::size_t n, std::size_t c, std::size_t h, std::size_t w,
                        std::size_t C, std::size_t H, std::size_t W) {
    return ((n * C + c) * H + h) * W + w;
}

[[noreturn]] void layer_fail(std::size_t layer_index, LayerKind kind, const std::string& message) {
    fail(ErrorCode::shape_mismatch,
         "layer " + std::to_string(layer_index) + " (" + layer_kind_name(kind) + "): " + message);
}

} // namespace

const char* layer_kind_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::dense: return "dense";
        case LayerKind::conv2d: return "conv2d";
        case LayerKind::relu: return "relu";
        case LayerKind::flatten: return "flatten";
        case LayerKind::maxpool2d: return "maxpool2d";
        case LayerKind::softmax_output: return "softmax";
    }
    return "?";
}

Layer Layer::dense(std::size_t fan_in, std::size_t fan_out) {
    Layer l;
    l.kind = LayerKind::dense;
    l.weight = Tensor({fan_out, fan_in});
    l.bias = Tensor({fan_out});
    return l;
}

Layer Layer::conv2d(std::size_t in_c, std::size_t out_c, int kernel, int stride) {
    if (kernel < 1 || stride < 1) fail(ErrorCode::invalid_argument, "conv2d kernel and stride must be positive");
    Layer l;
    l.kind = LayerKind::conv2d;
    l.weight = Tensor({out_c, in_c, static_cast<std::size_t>(kernel), static_cast<std::size_t>(kernel)});
    l.bias = Tensor({out_c});
    l.stride = stride;
    return l;
}

Layer Layer::maxpool2d(int pool, int stride) {
    if (pool < 1) fail(ErrorCode::invalid_argument, "maxpool2d window must be positive");
    Layer l;
    l.kind = LayerKind::maxpool2d;
    l.pool = pool;
    l.stride = stride > 0 ? stride : pool;
    return l;
}

std::string architecture_signature(const std::vector<Layer>& layers) {
    std::ostringstream os;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (i) os << '|';
        const Layer& l = layers[i];
        switch (l.kind) {
            case LayerKind::dense:
                os << "dense(" << l.weight.shape[1] << "->" << l.weight.shape[0] << ")";
                break;
            case LayerKind::conv2d:
                os << "conv2d(" << l.weight.shape[1] << "->" << l.weight.shape[0]
                   << ",k" << l.weight.shape[2] << ",s" << l.stride << ")";
                break;
            case LayerKind::maxpool2d:
                os << "maxpool2d(k" << l.pool << ",s" << l.stride << ")";
                break;
            default:
                os << layer_kind_name(l.kind);
        }
    }
    return os.str();
}

std::size_t LayeredModel::param_count() const {
    std::size_t n = 0;
    for_each_param([&](const Tensor& t) { n += t.size(); });
    return n;
}

int LayeredModel::num_classes() const {
    for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
        if (it->kind == LayerKind::dense) return static_cast<int>(it->weight.shape[0]);
    }
    fail(ErrorCode::invalid_argument, "model has no dense layer; cannot determine class count");
}

void LayeredModel::refresh_architecture_id() {
    architecture_id = architecture_signature(layers);
}

bool models_bit_equal(const LayeredModel& a, const LayeredModel& b) {
    if (a.architecture_id != b.architecture_id) return false;
    if (a.layers.size() != b.layers.size()) return false;
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        if (!bit_equal(a.layers[i].weight, b.layers[i].weight)) return false;
        if (!bit_equal(a.layers[i].bias, b.layers[i].bias)) return false;
    }
    return true;
}

void init_params(LayeredModel& model, std::uint64_t seed) {
    auto rng = make_rng(seed);
    for (Layer& l : model.layers) {
        if (!l.has_params()) continue;
        std::size_t fan_in = l.kind == LayerKind::dense
                                 ? l.weight.shape[1]
                                 : l.weight.shape[1] * l.weight.shape[2] * l.weight.shape[3];
        double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (double& w : l.weight.data) w = dist(rng);
        l.bias.fill(0.0);
    }
}

LayeredModel make_mlp(const MlpSpec& spec, std::uint64_t seed) {
    if (spec.classes < 2) fail(ErrorCode::invalid_argument, "mlp needs at least 2 classes");
    if (spec.input_features == 0) fail(ErrorCode::invalid_argument, "mlp input_features must be positive");
    LayeredModel m;
    m.layers.push_back(Layer::flatten());
    std::size_t in = spec.input_features;
    for (int h : spec.hidden) {
        if (h < 1) fail(ErrorCode::invalid_argument, "mlp hidden widths must be positive");
        m.layers.push_back(Layer::dense(in, static_cast<std::size_t>(h)));
        m.layers.push_back(Layer::relu());
        in = static_cast<std::size_t>(h);
    }
    m.layers.push_back(Layer::dense(in, static_cast<std::size_t>(spec.classes)));
    m.layers.push_back(Layer::softmax_output());
    m.refresh_architecture_id();
    init_params(m, seed);
    return m;
}

LayeredModel make_cnn(const CnnSpec& spec, std::uint64_t seed) {
    if (spec.classes < 2) fail(ErrorCode::invalid_argument, "cnn needs at least 2 classes");
    LayeredModel m;
    std::size_t c = spec.in_channels, h = spec.height, w = spec.width;
    for (int out_c : spec.conv_channels) {
        if (out_c < 1) fail(ErrorCode::invalid_argument, "cnn conv channels must be positive");
        if (h < static_cast<std::size_t>(spec.kernel) || w < static_cast<std::size_t>(spec.kernel)) {
            fail(ErrorCode::invalid_argument, "cnn input too small for kernel " + std::to_string(spec.kernel));
        }
        m.layers.push_back(Layer::conv2d(c, static_cast<std::size_t>(out_c), spec.kernel));
        m.layers.push_back(Layer::relu());
        c = static_cast<std::size_t>(out_c);
        h = h - static_cast<std::size_t>(spec.kernel) + 1;
        w = w - static_cast<std::size_t>(spec.kernel) + 1;
        if (h >= static_cast<std::size_t>(spec.pool) && w >= static_cast<std::size_t>(spec.pool)) {
            m.layers.push_back(Layer::maxpool2d(spec.pool));
            h = (h - static_cast<std::size_t>(spec.pool)) / static_cast<std::size_t>(spec.pool) + 1;
            w = (w - static_cast<std::size_t>(spec.pool)) / static_cast<std::size_t>(spec.pool) + 1;
        }
    }
    m.layers.push_back(Layer::flatten());
    m.layers.push_back(Layer::dense(c * h * w, static_cast<std::size_t>(spec.dense_hidden)));
    m.layers.push_back(Layer::relu());
    m.layers.push_back(Layer::dense(static_cast<std::size_t>(spec.dense_hidden), static_cast<std::size_t>(spec.classes)));
    m.layers.push_back(Layer::softmax_output());
    m.refresh_architecture_id();
    init_params(m, seed);
    return m;
}

// ---------------------------------------------------------------------------
// Forward pass

namespace {

Tensor dense_forward(const Layer& l, const Tensor& x, std::size_t li) {
    if (x.rank() != 2) layer_fail(li, l.kind, "expected rank-2 input, got " + shape_to_string(x.shape));
    std::size_t batch = x.shape[0], in = x.shape[1];
    std::size_t out = l.weight.shape[0];
    if (in != l.weight.shape[1]) {
        layer_fail(li, l.kind, "expected " + std::to_string(l.weight.shape[1]) + " input features, got " + std::to_string(in));
    }
    Tensor y({batch, out});
    for (std::size_t b = 0; b < batch; ++b) {
        const double* xr = &x.data[b * in];
        double* yr = &y.data[b * out];
        for (std::size_t o = 0; o < out; ++o) {
            const double* wr = &l.weight.data[o * in];
            double acc = l.bias.data[o];
            for (std::size_t i = 0; i < in; ++i) acc += wr[i] * xr[i];
            yr[o] = acc;
        }
    }
    return y;
}

Tensor conv2d_forward(const Layer& l, const Tensor& x, std::size_t li) {
    if (x.rank() != 4) layer_fail(li, l.kind, "expected rank-4 input (B,C,H,W), got " + shape_to_string(x.shape));
    std::size_t B = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
    std::size_t OC = l.weight.shape[0], IC = l.weight.shape[1], KH = l.weight.shape[2], KW = l.weight.shape[3];
    std::size_t S = static_cast<std::size_t>(l.stride);
    if (C != IC) layer_fail(li, l.kind, "expected " + std::to_string(IC) + " input channels, got " + std::to_string(C));
    if (H < KH || W < KW) layer_fail(li, l.kind, "input " + shape_to_string(x.shape) + " smaller than kernel");
    std::size_t OH = (H - KH) / S + 1, OW = (W - KW) / S + 1;
    Tensor y({B, OC, OH, OW});
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t oc = 0; oc < OC; ++oc) {
            double bias = l.bias.data[oc];
            for (std::size_t oh = 0; oh < OH; ++oh) {
                for (std::size_t ow = 0; ow < OW; ++ow) {
                    double acc = bias;
                    for (std::size_t ic = 0; ic < IC; ++ic) {
                        for (std::size_t kh = 0; kh < KH; ++kh) {
                            const double* xr = &x.data[idx4(b, ic, oh * S + kh, ow * S, C, H, W)];
                            const double* wr = &l.weight.data[((oc * IC + ic) * KH + kh) * KW];
                            for (std::size_t kw = 0; kw < KW; ++kw) acc += wr[kw] * xr[kw];
                        }
                    }
                    y.data[idx4(b, oc, oh, ow, OC, OH, OW)] = acc;
                }
            }
        }
    }
    return y;
}

Tensor maxpool_forward(const Layer& l, const Tensor& x, std::size_t li, std::vector<std::size_t>& argmax) {
    if (x.rank() != 4) layer_fail(li, l.kind, "expected rank-4 input (B,C,H,W), got " + shape_to_string(x.shape));
    std::size_t B = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
    std::size_t P = static_cast<std::size_t>(l.pool), S = static_cast<std::size_t>(l.stride);
    if (H < P || W < P) layer_fail(li, l.kind, "input " + shape_to_string(x.shape) + " smaller than pool window");
    std::size_t OH = (H - P) / S + 1, OW = (W - P) / S + 1;
    Tensor y({B, C, OH, OW});
    argmax.assign(y.size(), 0);
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t oh = 0; oh < OH; ++oh) {
                for (std::size_t ow = 0; ow < OW; ++ow) {
                    double best = -std::numeric_limits<double>::infinity();
                    std::size_t best_idx = 0;
                    for (std::size_t ph = 0; ph < P; ++ph) {
                        for (std::size_t pw = 0; pw < P; ++pw) {
                            std::size_t src = idx4(b, c, oh * S + ph, ow * S + pw, C, H, W);
                            if (x.data[src] > best) {
                                best = x.data[src];
                                best_idx = src;
                            }
                        }
                    }
                    std::size_t dst = idx4(b, c, oh, ow, C, OH, OW);
                    y.data[dst] = best;
                    argmax[dst] = best_idx;
                }
            }
        }
    }
    return y;
}

// Row-wise log-sum-exp stabilized softmax; fills both probabilities and
// log-probabilities.
void softmax_rows(const Tensor& z, Tensor& probs, Tensor& log_probs) {
    std::size_t B = z.shape[0], K = z.shape[1];
    probs = Tensor({B, K});
    log_probs = Tensor({B, K});
    for (std::size_t b = 0; b < B; ++b) {
        const double* zr = &z.data[b * K];
        double m = zr[0];
        for (std::size_t k = 1; k < K; ++k) m = std::max(m, zr[k]);
        double sum = 0.0;
        for (std::size_t k = 0; k < K; ++k) sum += std::exp(zr[k] - m);
        double lse = m + std::log(sum);
        for (std::size_t k = 0; k < K; ++k) {
            log_probs.data[b * K + k] = zr[k] - lse;
            probs.data[b * K + k] = std::exp(zr[k] - lse);
        }
    }
}

} // namespace

ForwardTrace forward_trace(const LayeredModel& model, const Tensor& batch_x) {
    if (model.layers.empty()) fail(ErrorCode::invalid_argument, "model has no layers");
    if (batch_x.rank() < 2) fail(ErrorCode::shape_mismatch, "batch input must have a leading batch dimension");
    ForwardTrace trace;
    trace.inputs.reserve(model.layers.size());
    trace.argmax.resize(model.layers.size());
    Tensor x = batch_x;
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const Layer& l = model.layers[i];
        trace.inputs.push_back(x);
        switch (l.kind) {
            case LayerKind::dense:
                x = dense_forward(l, x, i);
                break;
            case LayerKind::conv2d:
                x = conv2d_forward(l, x, i);
                break;
            case LayerKind::relu:
                for (double& v : x.data) v = v > 0.0 ? v : 0.0;
                break;
            case LayerKind::flatten: {
                std::size_t B = x.shape[0];
                x.shape = {B, x.size() / B};
                break;
            }
            case LayerKind::maxpool2d:
                x = maxpool_forward(l, x, i, trace.argmax[i]);
                break;
            case LayerKind::softmax_output: {
                if (x.rank() != 2) layer_fail(i, l.kind, "expected rank-2 logits, got " + shape_to_string(x.shape));
                Tensor probs, logp;
                softmax_rows(x, probs, logp);
                x = probs;
                trace.log_probs = std::move(logp);
                break;
            }
        }
    }
    x.ensure_finite("forward output");
    trace.output = std::move(x);
    return trace;
}

Tensor forward(const LayeredModel& model, const Tensor& batch_x) {
    return forward_trace(model, batch_x).output;
}

ParamGrads ParamGrads::zeros_like(const LayeredModel& model) {
    ParamGrads g;
    g.weight.resize(model.layers.size());
    g.bias.resize(model.layers.size());
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        if (!model.layers[i].has_params()) continue;
        g.weight[i] = Tensor(model.layers[i].weight.shape);
        g.bias[i] = Tensor(model.layers[i].bias.shape);
    }
    return g;
}

void ParamGrads::scale(double s) {
    for (Tensor& t : weight)
        for (double& v : t.data) v *= s;
    for (Tensor& t : bias)
        for (double& v : t.data) v *= s;
}

// ---------------------------------------------------------------------------
// Backward pass

namespace {

Tensor dense_backward(const Layer& l, const Tensor& x, const Tensor& gy, Tensor& gw, Tensor& gb) {
    std::size_t B = x.shape[0], in = x.shape[1], out = l.weight.shape[0];
    Tensor gx({B, in});
    for (std::size_t b = 0; b < B; ++b) {
        const double* xr = &x.data[b * in];
        const double* gyr = &gy.data[b * out];
        double* gxr = &gx.data[b * in];
        for (std::size_t o = 0; o < out; ++o) {
            double g = gyr[o];
            gb.data[o] += g;
            double* gwr = &gw.data[o * in];
            const double* wr = &l.weight.data[o * in];
            for (std::size_t i = 0; i < in; ++i) {
                gwr[i] += g * xr[i];
                gxr[i] += g * wr[i];
            }
        }
    }
    return gx;
}

Tensor conv2d_backward(const Layer& l, const Tensor& x, const Tensor& gy, Tensor& gw, Tensor& gb) {
    std::size_t B = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
    std::size_t OC = gy.shape[1], OH = gy.shape[2], OW = gy.shape[3];
    std::size_t KH = l.weight.shape[2], KW = l.weight.shape[3];
    std::size_t S = static_cast<std::size_t>(l.stride);
    Tensor gx({B, C, H, W});
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t oc = 0; oc < OC; ++oc) {
            for (std::size_t oh = 0; oh < OH; ++oh) {
                for (std::size_t ow = 0; ow < OW; ++ow) {
                    double g = gy.data[idx4(b, oc, oh, ow, OC, OH, OW)];
                    gb.data[oc] += g;
                    for (std::size_t ic = 0; ic < C; ++ic) {
                        for (std::size_t kh = 0; kh < KH; ++kh) {
                            const double* xr = &x.data[idx4(b, ic, oh * S + kh, ow * S, C, H, W)];
                            double* gxr = &gx.data[idx4(b, ic, oh * S + kh, ow * S, C, H, W)];
                            double* gwr = &gw.data[((oc * C + ic) * KH + kh) * KW];
                            const double* wr = &l.weight.data[((oc * C + ic) * KH + kh) * KW];
                            for (std::size_t kw = 0; kw < KW; ++kw) {
                                gwr[kw] += g * xr[kw];
                                gxr[kw] += g * wr[kw];
                            }
                        }
                    }
                }
            }
        }
    }
    return gx;
}

} // namespace

std::pair<double, ParamGrads> loss_and_grad(const LayeredModel& model, const Tensor& batch_x,
                                            const std::vector<int>& batch_y) {
    if (model.layers.empty() || model.layers.back().kind != LayerKind::softmax_output) {
        fail(ErrorCode::invalid_argument, "loss_and_grad requires a softmax-terminated model");
    }
    ForwardTrace trace = forward_trace(model, batch_x);
    std::size_t B = trace.output.shape[0], K = trace.output.shape[1];
    if (batch_y.size() != B) {
        fail(ErrorCode::shape_mismatch, "batch has " + std::to_string(B) + " samples but " +
                                            std::to_string(batch_y.size()) + " labels");
    }
    for (std::size_t b = 0; b < B; ++b) {
        if (batch_y[b] < 0 || static_cast<std::size_t>(batch_y[b]) >= K) {
            fail(ErrorCode::invalid_argument, "label " + std::to_string(batch_y[b]) + " out of range [0, " +
                                                  std::to_string(K) + ") at sample " + std::to_string(b));
        }
    }

    double loss = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        loss -= trace.log_probs.data[b * K + static_cast<std::size_t>(batch_y[b])];
    }
    loss /= static_cast<double>(B);
    if (!std::isfinite(loss)) fail(ErrorCode::invalid_argument, "loss is non-finite");

    // Combined softmax + cross-entropy gradient w.r.t. the logits.
    Tensor g({B, K});
    double inv_b = 1.0 / static_cast<double>(B);
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t k = 0; k < K; ++k) {
            double p = trace.output.data[b * K + k];
            double t = (static_cast<std::size_t>(batch_y[b]) == k) ? 1.0 : 0.0;
            g.data[b * K + k] = (p - t) * inv_b;
        }
    }

    ParamGrads grads = ParamGrads::zeros_like(model);
    for (std::size_t ri = model.layers.size() - 1; ri-- > 0;) {
        const Layer& l = model.layers[ri];
        const Tensor& x = trace.inputs[ri];
        switch (l.kind) {
            case LayerKind::dense:
                g = dense_backward(l, x, g, grads.weight[ri], grads.bias[ri]);
                break;
            case LayerKind::conv2d:
                g = conv2d_backward(l, x, g, grads.weight[ri], grads.bias[ri]);
                break;
            case LayerKind::relu:
                for (std::size_t i = 0; i < g.data.size(); ++i) {
                    if (x.data[i] <= 0.0) g.data[i] = 0.0;
                }
                break;
            case LayerKind::flatten:
                g.shape = x.shape;
                break;
            case LayerKind::maxpool2d: {
                Tensor gx(x.shape);
                const auto& winners = trace.argmax[ri];
                for (std::size_t i = 0; i < g.data.size(); ++i) gx.data[winners[i]] += g.data[i];
                g = std::move(gx);
                break;
            }
            case LayerKind::softmax_output:
                fail(ErrorCode::invalid_argument, "softmax layer is only supported as the model output");
        }
    }
    return {loss, std::move(grads)};
}

EvalResult evaluate(const LayeredModel& model, const Tensor& xs, const std::vector<int>& ys) {
    std::size_t n = ys.size();
    if (n == 0) fail(ErrorCode::invalid_argument, "evaluate: dataset is empty");
    if (xs.shape.empty() || xs.shape[0] != n) {
        fail(ErrorCode::shape_mismatch, "evaluate: " + std::to_string(n) + " labels but input batch dim is " +
                                            (xs.shape.empty() ? std::string("absent") : std::to_string(xs.shape[0])));
    }
    std::size_t sample_stride = xs.size() / n;
    constexpr std::size_t kChunk = 256;

    std::size_t correct = 0;
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += kChunk) {
        std::size_t count = std::min(kChunk, n - start);
        std::vector<std::size_t> chunk_shape = xs.shape;
        chunk_shape[0] = count;
        Tensor batch(chunk_shape);
        std::memcpy(batch.data.data(), &xs.data[start * sample_stride], count * sample_stride * sizeof(double));

        ForwardTrace trace = forward_trace(model, batch);
        std::size_t K = trace.output.shape[1];
        bool has_logp = trace.log_probs.size() == trace.output.size();
        for (std::size_t b = 0; b < count; ++b) {
            const double* row = &trace.output.data[b * K];
            std::size_t arg = 0;
            for (std::size_t k = 1; k < K; ++k) {
                if (row[k] > row[arg]) arg = k;
            }
            int label = ys[start + b];
            if (label < 0 || static_cast<std::size_t>(label) >= K) {
                fail(ErrorCode::invalid_argument, "evaluate: label " + std::to_string(label) + " out of range");
            }
            if (arg == static_cast<std::size_t>(label)) ++correct;
            if (has_logp) loss_sum -= trace.log_probs.data[b * K + static_cast<std::size_t>(label)];
        }
    }
    EvalResult r;
    r.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    r.mean_loss = loss_sum / static_cast<double>(n);
    return r;
}

} // namespace fedmr
