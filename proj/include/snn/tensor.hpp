#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace snn {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense row-major tensor. Scalar type is a template parameter: float is the
// training default, double is used by the gradient-check paths.
template <typename T>
struct Tensor {
    Shape shape;
    std::vector<T> data;

    Tensor() = default;
    Tensor(Shape s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        if (shape_size(shape) != data.size())
            throw ShapeError("tensor data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_str(shape));
    }

    static Tensor zeros(Shape s) {
        Tensor t;
        t.shape = std::move(s);
        t.data.assign(shape_size(t.shape), T(0));
        return t;
    }

    static Tensor full(Shape s, T v) {
        Tensor t;
        t.shape = std::move(s);
        t.data.assign(shape_size(t.shape), v);
        return t;
    }

    static Tensor scalar(T v) { return Tensor({1}, {v}); }

    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
    bool is_scalar() const { return data.size() == 1; }

    T& operator[](std::size_t i) { return data[i]; }
    const T& operator[](std::size_t i) const { return data[i]; }

    // 2-d accessor (row-major); shape checks live in the ops, not here
    T& at2(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
    const T& at2(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }

    Tensor reshaped(Shape s) const {
        if (shape_size(s) != data.size())
            throw ShapeError("cannot reshape " + shape_str(shape) + " to " + shape_str(s));
        return Tensor(std::move(s), data);
    }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out;
        out.shape = shape;
        out.data.resize(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
        return out;
    }
};

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
    if (a.shape != b.shape)
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape) + " vs " +
                         shape_str(b.shape));
}

}  // namespace snn
