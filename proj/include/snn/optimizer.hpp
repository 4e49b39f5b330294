#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "snn/networks.hpp"

namespace snn {

enum class OptimizerKind { Adam, Sgd };

// Adam with the standard moment constants, or plain SGD; state per tensor.
struct Optimizer {
    OptimizerKind kind;
    double lr;
    std::vector<Tensor<float>> m, v;
    std::size_t step_count = 0;

    Optimizer(OptimizerKind k, double rate, const NetworkParams& params) : kind(k), lr(rate) {
        if (kind == OptimizerKind::Adam)
            for (const auto& t : params.tensors) {
                m.push_back(Tensor<float>::zeros(t.shape));
                v.push_back(Tensor<float>::zeros(t.shape));
            }
    }

    void step(NetworkParams& params, const std::vector<Tensor<float>>& grads) {
        ++step_count;
        if (kind == OptimizerKind::Sgd) {
            for (std::size_t p = 0; p < params.tensors.size(); ++p) {
                auto& w = params.tensors[p].data;
                const auto& g = grads[p].data;
                for (std::size_t i = 0; i < w.size(); ++i)
                    w[i] -= static_cast<float>(lr) * g[i];
            }
            return;
        }
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step_count));
        const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step_count));
        for (std::size_t p = 0; p < params.tensors.size(); ++p) {
            auto& w = params.tensors[p].data;
            const auto& g = grads[p].data;
            auto& mp = m[p].data;
            auto& vp = v[p].data;
            for (std::size_t i = 0; i < w.size(); ++i) {
                mp[i] = static_cast<float>(b1 * mp[i] + (1 - b1) * g[i]);
                vp[i] = static_cast<float>(b2 * vp[i] + (1 - b2) * double(g[i]) * g[i]);
                const double mhat = mp[i] / bc1;
                const double vhat = vp[i] / bc2;
                w[i] -= static_cast<float>(lr * mhat / (std::sqrt(vhat) + eps));
            }
        }
    }
};

}  // namespace snn
