#include "fedmr/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "fedmr/error.hpp"

namespace fedmr {

namespace {

constexpr char kMagic[8] = {'F', 'E', 'D', 'M', 'R', 'C', 'K', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double v) {
    put_u64(os, std::bit_cast<std::uint64_t>(v));
}

std::uint32_t get_u32(std::istream& is, const std::string& path) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) fail(ErrorCode::io_error, path + ": truncated checkpoint");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& is, const std::string& path) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) fail(ErrorCode::io_error, path + ": truncated checkpoint");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& is, const std::string& path) {
    return std::bit_cast<double>(get_u64(is, path));
}

void put_tensor(std::ostream& os, const Tensor& t) {
    put_u32(os, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape) put_u64(os, static_cast<std::uint64_t>(d));
    for (double v : t.data) put_f64(os, v);
}

Tensor get_tensor(std::istream& is, const std::string& path) {
    std::uint32_t ndim = get_u32(is, path);
    if (ndim > 8) fail(ErrorCode::io_error, path + ": implausible tensor rank " + std::to_string(ndim));
    std::vector<std::size_t> shape(ndim);
    for (std::uint32_t i = 0; i < ndim; ++i) shape[i] = static_cast<std::size_t>(get_u64(is, path));
    std::size_t n = shape_product(shape);
    std::vector<double> data(n);
    for (std::size_t i = 0; i < n; ++i) data[i] = get_f64(is, path);
    return Tensor(std::move(shape), std::move(data));
}

} // namespace

void save_checkpoint(const LayeredModel& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorCode::io_error, path + ": cannot open for writing");
    os.write(kMagic, sizeof(kMagic));
    put_u32(os, static_cast<std::uint32_t>(model.architecture_id.size()));
    os.write(model.architecture_id.data(), static_cast<std::streamsize>(model.architecture_id.size()));
    put_u32(os, static_cast<std::uint32_t>(model.layers.size()));
    for (const Layer& l : model.layers) {
        unsigned char kind = static_cast<unsigned char>(l.kind);
        os.write(reinterpret_cast<const char*>(&kind), 1);
        put_u32(os, static_cast<std::uint32_t>(l.stride));
        put_u32(os, static_cast<std::uint32_t>(l.pool));
        if (l.has_params()) {
            put_u32(os, 2);
            put_tensor(os, l.weight);
            put_tensor(os, l.bias);
        } else {
            put_u32(os, 0);
        }
    }
    if (!os) fail(ErrorCode::io_error, path + ": write failed");
}

LayeredModel load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail(ErrorCode::io_error, path + ": cannot open");
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
        fail(ErrorCode::io_error, path + ": bad magic");
    }
    std::uint32_t arch_len = get_u32(is, path);
    std::string arch(arch_len, '\0');
    if (arch_len > 0 && !is.read(arch.data(), arch_len)) fail(ErrorCode::io_error, path + ": truncated checkpoint");
    std::uint32_t layer_count = get_u32(is, path);

    LayeredModel model;
    model.layers.reserve(layer_count);
    for (std::uint32_t i = 0; i < layer_count; ++i) {
        unsigned char kind_byte;
        if (!is.read(reinterpret_cast<char*>(&kind_byte), 1)) fail(ErrorCode::io_error, path + ": truncated checkpoint");
        if (kind_byte > static_cast<unsigned char>(LayerKind::softmax_output)) {
            fail(ErrorCode::io_error, path + ": unknown layer kind " + std::to_string(kind_byte));
        }
        Layer l;
        l.kind = static_cast<LayerKind>(kind_byte);
        l.stride = static_cast<int>(get_u32(is, path));
        l.pool = static_cast<int>(get_u32(is, path));
        std::uint32_t param_count = get_u32(is, path);
        if (param_count == 2) {
            l.weight = get_tensor(is, path);
            l.bias = get_tensor(is, path);
        } else if (param_count != 0) {
            fail(ErrorCode::io_error, path + ": unexpected param count " + std::to_string(param_count));
        }
        if (l.has_params() != (param_count == 2)) {
            fail(ErrorCode::io_error, path + ": params inconsistent with layer kind");
        }
        model.layers.push_back(std::move(l));
    }
    model.refresh_architecture_id();
    if (model.architecture_id != arch) {
        fail(ErrorCode::io_error, path + ": stored architecture id does not match layer contents");
    }
    return model;
}

} // namespace fedmr
