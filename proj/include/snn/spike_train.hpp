#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

#include "snn/tensor.hpp"

namespace snn {

// A [steps x width] binary record of spikes over discrete coarse intervals.
struct SpikeTrain {
    std::size_t steps = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> bits;  // row-major, entries in {0, 1}

    SpikeTrain() = default;
    SpikeTrain(std::size_t t, std::size_t n) : steps(t), width(n), bits(t * n, 0) {}

    std::uint8_t& at(std::size_t t, std::size_t i) { return bits[t * width + i]; }
    std::uint8_t at(std::size_t t, std::size_t i) const { return bits[t * width + i]; }

    std::size_t count() const {
        std::size_t n = 0;
        for (std::uint8_t b : bits) n += b;
        return n;
    }

    std::size_t count_neuron(std::size_t i) const {
        std::size_t n = 0;
        for (std::size_t t = 0; t < steps; ++t) n += at(t, i);
        return n;
    }

    // One step as a float row [1 x width] or a batch row extraction elsewhere.
    template <typename T>
    Tensor<T> step_row(std::size_t t) const {
        Tensor<T> out = Tensor<T>::zeros({1, width});
        for (std::size_t i = 0; i < width; ++i) out[i] = static_cast<T>(at(t, i));
        return out;
    }
};

}  // namespace snn
