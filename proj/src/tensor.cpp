#include "fedmr/tensor.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "fedmr/error.hpp"

namespace fedmr {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_to_string(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ", ";
        os << shape[i];
    }
    os << ')';
    return os.str();
}

Tensor::Tensor(std::vector<std::size_t> shp)
    : shape(std::move(shp)), data(shape_product(shape), 0.0) {
    for (std::size_t d : shape) {
        if (d == 0) fail(ErrorCode::invalid_argument, "tensor dimensions must be positive, got " + shape_to_string(shape));
    }
}

Tensor::Tensor(std::vector<std::size_t> shp, std::vector<double> values)
    : shape(std::move(shp)), data(std::move(values)) {
    if (shape_product(shape) != data.size()) {
        fail(ErrorCode::shape_mismatch,
             "tensor shape " + shape_to_string(shape) + " does not match payload of " + std::to_string(data.size()) + " values");
    }
}

void Tensor::fill(double v) {
    for (double& x : data) x = v;
}

void Tensor::ensure_finite(const std::string& what) const {
    for (double x : data) {
        if (!std::isfinite(x)) {
            fail(ErrorCode::invalid_argument, what + ": non-finite value encountered");
        }
    }
}

bool bit_equal(const Tensor& a, const Tensor& b) {
    if (a.shape != b.shape) return false;
    if (a.data.size() != b.data.size()) return false;
    return std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0;
}

} // namespace fedmr
