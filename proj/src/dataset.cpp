#include "fedmr/dataset.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "fedmr/error.hpp"
#include "fedmr/rng.hpp"

namespace fedmr {

std::vector<std::size_t> Dataset::feature_shape() const {
    if (xs.shape.empty()) return {};
    return std::vector<std::size_t>(xs.shape.begin() + 1, xs.shape.end());
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
    Dataset out;
    out.num_classes = num_classes;
    std::vector<std::size_t> shape = xs.shape;
    shape[0] = indices.size();
    out.xs = Tensor(shape);
    out.ys.reserve(indices.size());
    std::size_t stride = sample_stride();
    for (std::size_t i = 0; i < indices.size(); ++i) {
        std::size_t src = indices[i];
        if (src >= size()) fail(ErrorCode::invalid_argument, "subset: index " + std::to_string(src) + " out of range");
        std::memcpy(&out.xs.data[i * stride], &xs.data[src * stride], stride * sizeof(double));
        out.ys.push_back(ys[src]);
    }
    return out;
}

EvalResult evaluate(const LayeredModel& model, const Dataset& dataset) {
    return evaluate(model, dataset.xs, dataset.ys);
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.classes < 2) fail(ErrorCode::invalid_argument, "synthetic data needs at least 2 classes");
    if (spec.samples < static_cast<std::size_t>(spec.classes)) {
        fail(ErrorCode::invalid_argument, "synthetic data needs at least one sample per class");
    }
    if (spec.noise < 0.0) fail(ErrorCode::invalid_argument, "synthetic noise must be non-negative");
    std::size_t features = spec.features;
    if (spec.kind == SyntheticSpec::Kind::spiral) {
        if (features != 2) fail(ErrorCode::invalid_argument, "spiral data is 2-D; set features = 2");
    } else if (features == 0) {
        fail(ErrorCode::invalid_argument, "synthetic features must be positive");
    }

    Dataset d;
    d.num_classes = spec.classes;
    d.xs = Tensor({spec.samples, features});
    d.ys.resize(spec.samples);

    std::uint64_t draw_stream = spec.draw_nonce == 0 ? stream::data_train : stream::data_test;
    auto draw_rng = make_rng(mix(spec.seed, draw_stream, spec.draw_nonce));
    std::normal_distribution<double> gauss(0.0, 1.0);

    if (spec.kind == SyntheticSpec::Kind::blobs) {
        // Class centers depend only on the structure seed, so train and test
        // splits drawn with different nonces share one distribution.
        auto center_rng = make_rng(mix(spec.seed, 0xb10b5ULL));
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        std::vector<double> centers(static_cast<std::size_t>(spec.classes) * features);
        for (double& c : centers) c = unit(center_rng);

        for (std::size_t i = 0; i < spec.samples; ++i) {
            int label = static_cast<int>(i % static_cast<std::size_t>(spec.classes));
            d.ys[i] = label;
            const double* center = &centers[static_cast<std::size_t>(label) * features];
            for (std::size_t f = 0; f < features; ++f) {
                d.xs.data[i * features + f] = center[f] + spec.noise * gauss(draw_rng);
            }
        }
    } else {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double two_pi = 2.0 * 3.14159265358979323846;
        for (std::size_t i = 0; i < spec.samples; ++i) {
            int label = static_cast<int>(i % static_cast<std::size_t>(spec.classes));
            d.ys[i] = label;
            double t = unit(draw_rng);
            double radius = 0.1 + 0.9 * t;
            double angle = two_pi * (t + static_cast<double>(label) / spec.classes);
            d.xs.data[i * 2] = radius * std::cos(angle) + spec.noise * gauss(draw_rng);
            d.xs.data[i * 2 + 1] = radius * std::sin(angle) + spec.noise * gauss(draw_rng);
        }
    }
    return d;
}

namespace {

std::uint32_t read_be_u32(std::istream& is, const std::string& path) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) fail(ErrorCode::io_error, path + ": truncated IDX header");
    return (static_cast<std::uint32_t>(b[0]) << 24) | (static_cast<std::uint32_t>(b[1]) << 16) |
           (static_cast<std::uint32_t>(b[2]) << 8) | static_cast<std::uint32_t>(b[3]);
}

} // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) fail(ErrorCode::io_error, images_path + ": cannot open");
    std::uint32_t magic = read_be_u32(img, images_path);
    if (magic != 0x00000803u) {
        fail(ErrorCode::io_error, images_path + ": bad magic (expected 0x00000803 image file)");
    }
    std::uint32_t count = read_be_u32(img, images_path);
    std::uint32_t rows = read_be_u32(img, images_path);
    std::uint32_t cols = read_be_u32(img, images_path);
    if (rows == 0 || cols == 0) fail(ErrorCode::io_error, images_path + ": zero image dimensions");

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) fail(ErrorCode::io_error, labels_path + ": cannot open");
    std::uint32_t lab_magic = read_be_u32(lab, labels_path);
    if (lab_magic != 0x00000801u) {
        fail(ErrorCode::io_error, labels_path + ": bad magic (expected 0x00000801 label file)");
    }
    std::uint32_t lab_count = read_be_u32(lab, labels_path);
    if (lab_count != count) {
        fail(ErrorCode::io_error, "IDX count mismatch: " + std::to_string(count) + " images vs " +
                                      std::to_string(lab_count) + " labels");
    }

    std::size_t pixels = static_cast<std::size_t>(count) * rows * cols;
    std::vector<unsigned char> raw(pixels);
    if (!img.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(pixels))) {
        fail(ErrorCode::io_error, images_path + ": truncated image payload");
    }
    std::vector<unsigned char> raw_labels(count);
    if (!lab.read(reinterpret_cast<char*>(raw_labels.data()), static_cast<std::streamsize>(count))) {
        fail(ErrorCode::io_error, labels_path + ": truncated label payload");
    }

    Dataset d;
    d.xs = Tensor({count, 1, rows, cols});
    for (std::size_t i = 0; i < pixels; ++i) d.xs.data[i] = static_cast<double>(raw[i]) / 255.0;
    d.ys.resize(count);
    int max_label = 0;
    for (std::uint32_t i = 0; i < count; ++i) {
        d.ys[i] = static_cast<int>(raw_labels[i]);
        max_label = std::max(max_label, d.ys[i]);
    }
    d.num_classes = max_label + 1;
    return d;
}

} // namespace fedmr
