#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace fedmr {

// Dense n-dimensional float64 array, row-major. The single parameter and
// activation carrier for the whole engine.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shp);
    Tensor(std::vector<std::size_t> shp, std::vector<double> values);

    static Tensor zeros(std::vector<std::size_t> shp) { return Tensor(std::move(shp)); }

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    bool empty() const { return data.empty(); }
    bool same_shape(const Tensor& other) const { return shape == other.shape; }

    // 2-D accessors (rows = shape[0], cols = shape[1]).
    double& at2(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
    double at2(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }

    void fill(double v);

    // Throws if any element is NaN or infinite.
    void ensure_finite(const std::string& what) const;
};

std::size_t shape_product(const std::vector<std::size_t>& shape);
std::string shape_to_string(const std::vector<std::size_t>& shape);

// Exact bitwise equality of shape and payload.
bool bit_equal(const Tensor& a, const Tensor& b);

} // namespace fedmr
