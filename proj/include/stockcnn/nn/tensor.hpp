#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "stockcnn/error.hpp"

namespace stockcnn::nn {

using Shape = std::vector<std::size_t>;

inline std::size_t element_count(const Shape& shape)
{
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

std::string shape_string(const Shape& shape);

/// Dense row-major tensor. product(shape) == data.size() always holds.
template <typename T>
struct Tensor {
    Shape shape;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(Shape s, T fill = T{0})
        : shape(std::move(s))
        , data(element_count(shape), fill)
    {
    }
    Tensor(Shape s, std::vector<T> values)
        : shape(std::move(s))
        , data(std::move(values))
    {
        if (data.size() != element_count(shape)) {
            throw Error(ErrorKind::ShapeMismatch, shape_string(shape) + " does not hold " +
                                                      std::to_string(data.size()) + " values");
        }
    }

    std::size_t size() const noexcept { return data.size(); }
    std::size_t dim(std::size_t axis) const { return shape.at(axis); }
    std::span<T> values() noexcept { return data; }
    std::span<const T> values() const noexcept { return data; }

    T& operator[](std::size_t i) noexcept { return data[i]; }
    const T& operator[](std::size_t i) const noexcept { return data[i]; }

    /// (c, y, x) on a rank-3 tensor.
    T& at(std::size_t c, std::size_t y, std::size_t x) noexcept
    {
        return data[(c * shape[1] + y) * shape[2] + x];
    }
    const T& at(std::size_t c, std::size_t y, std::size_t x) const noexcept
    {
        return data[(c * shape[1] + y) * shape[2] + x];
    }

    bool all_finite() const noexcept
    {
        for (const T& v : data) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

inline void require_shape(const Shape& actual, const Shape& expected, const char* what)
{
    if (actual != expected) {
        throw Error(ErrorKind::ShapeMismatch, std::string(what) + ": expected " +
                                                  shape_string(expected) + ", got " +
                                                  shape_string(actual));
    }
}

} // namespace stockcnn::nn
