#pragma once

#include <variant>
#include <vector>

#include "snn/autodiff.hpp"
#include "snn/kernels.hpp"
#include "snn/networks.hpp"

namespace snn {

// One encoded batch: either per-step binary spike tensors or a constant
// analog drive, each [B x input_numel].
template <typename T>
struct EncodedBatch {
    std::vector<Tensor<T>> steps;  // empty for analog input
    Tensor<T> analog;
    std::size_t n_steps = 0;

    bool is_analog() const { return steps.empty(); }
    std::size_t batch() const {
        return is_analog() ? analog.shape[0] : steps[0].shape[0];
    }
    const Tensor<T>& at(std::size_t t) const { return is_analog() ? analog : steps[t]; }
};

template <typename T>
struct ForwardResult {
    Tensor<T> activity;                    // [B x out] total output spike counts
    std::vector<Tensor<T>> output_steps;   // per-step output spikes when recorded
};

namespace detail {

template <typename T>
Tensor<T> apply_dense_plain(const DenseSpec& d, const Tensor<T>& w, const Tensor<T>* b,
                            const Tensor<T>& x) {
    const std::size_t bsz = x.shape[0];
    Tensor<T> y = Tensor<T>::zeros({bsz, d.out});
    kernels::matmul_nt_acc(x.data.data(), w.data.data(), y.data.data(), bsz, d.in, d.out);
    if (b)
        for (std::size_t r = 0; r < bsz; ++r)
            for (std::size_t c = 0; c < d.out; ++c) y.at2(r, c) += (*b)[c];
    return y;
}

template <typename T>
Tensor<T> apply_conv_plain(const Conv2dSpec& c, const Shape& in_shape, const Tensor<T>& w,
                           const Tensor<T>* b, const Tensor<T>& x) {
    const std::size_t bsz = x.shape[0];
    const std::size_t h = in_shape[1], wd = in_shape[2];
    const std::size_t ho = kernels::conv_out_dim(h, c.k, c.stride, c.pad);
    const std::size_t wo = kernels::conv_out_dim(wd, c.k, c.stride, c.pad);
    Tensor<T> y = Tensor<T>::zeros({bsz, c.out_ch, ho, wo});
    kernels::conv2d_forward(x.data.data(), w.data.data(), b ? b->data.data() : nullptr,
                            y.data.data(), bsz, c.in_ch, h, wd, c.out_ch, c.k, c.stride, c.pad,
                            ho, wo);
    return y;
}

template <typename T>
Tensor<T> apply_pool_plain(const MaxPoolSpec& m, const Shape& in_shape, const Tensor<T>& x) {
    const std::size_t bsz = x.shape[0];
    const std::size_t ch = in_shape[0], h = in_shape[1], w = in_shape[2];
    const std::size_t ho = (h - m.k) / m.stride + 1, wo = (w - m.k) / m.stride + 1;
    Tensor<T> y = Tensor<T>::zeros({bsz, ch, ho, wo});
    std::vector<std::size_t> argmax(y.size());
    kernels::maxpool2d_forward(x.data.data(), y.data.data(), argmax.data(), bsz, ch, h, w, m.k,
                               m.stride, ho, wo);
    return y;
}

}  // namespace detail

// Plain (non-tape) forward: per step, each layer consumes the previous
// layer's same-step output; spiking cells thread (v, s) across steps; returns
// per-output-neuron spike counts.
template <typename T>
ForwardResult<T> forward_eval(const NetworkSpec& spec, const NetworkParams& params,
                              const EncodedBatch<T>& input, bool record_output = false) {
    spec.validate();
    const auto shapes = layer_shapes(spec);
    const auto slots = param_slots(spec);
    const std::size_t bsz = input.batch();
    const std::size_t n_steps = input.n_steps;
    if (shape_size(spec.input_shape) * bsz != input.at(0).size())
        throw NetworkError("forward: encoded input does not match network input shape " +
                           shape_str(spec.input_shape));
    const T ratio = static_cast<T>(spec.cell.ratio);

    // parameter lookup per layer
    std::vector<const Tensor<T>*> weight_of(spec.layers.size(), nullptr);
    std::vector<const Tensor<T>*> bias_of(spec.layers.size(), nullptr);
    std::vector<Tensor<T>> casted;
    casted.reserve(params.tensors.size());
    if (params.tensors.size() != slots.size())
        throw NetworkError("forward: parameter count does not match network spec");
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if constexpr (std::is_same_v<T, float>) {
            (slots[i].is_bias ? bias_of : weight_of)[slots[i].layer] = &params.tensors[i];
        } else {
            casted.push_back(params.tensors[i].template cast<T>());
            (slots[i].is_bias ? bias_of : weight_of)[slots[i].layer] = &casted.back();
        }
    }

    // per-spike-layer threaded state
    std::vector<CellState<T>> states;
    for (std::size_t li = 0; li < spec.layers.size(); ++li)
        if (std::holds_alternative<SpikeLayerSpec>(spec.layers[li]) ||
            std::holds_alternative<EncoderLayerSpec>(spec.layers[li]))
            states.push_back(CellState<T>::zeros(bsz * shape_size(shapes[li])));

    ForwardResult<T> out;
    out.activity = Tensor<T>::zeros({bsz, spec.output_size()});
    for (std::size_t t = 0; t < n_steps; ++t) {
        Tensor<T> cur = input.at(t);
        std::size_t cell_idx = 0;
        for (std::size_t li = 0; li < spec.layers.size(); ++li) {
            const LayerSpec& layer = spec.layers[li];
            const Shape in_shape = li == 0 ? spec.input_shape : shapes[li - 1];
            if (const auto* d = std::get_if<DenseSpec>(&layer)) {
                cur = detail::apply_dense_plain(*d, *weight_of[li], bias_of[li],
                                                cur.reshaped({bsz, d->in}));
            } else if (const auto* c = std::get_if<Conv2dSpec>(&layer)) {
                cur = detail::apply_conv_plain(
                    *c, in_shape, *weight_of[li], bias_of[li],
                    cur.reshaped({bsz, in_shape[0], in_shape[1], in_shape[2]}));
            } else if (const auto* m = std::get_if<MaxPoolSpec>(&layer)) {
                cur = detail::apply_pool_plain(
                    *m, in_shape, cur.reshaped({bsz, in_shape[0], in_shape[1], in_shape[2]}));
            } else {
                CellState<T>& st = states[cell_idx++];
                for (std::size_t i = 0; i < cur.size(); ++i) cur[i] *= ratio;
                step_cell(spec.cell, st, cur.data.data(), cur.size());
                std::copy(st.s.begin(), st.s.end(), cur.data.begin());
            }
        }
        Tensor<T> flat = cur.reshaped({bsz, spec.output_size()});
        for (std::size_t i = 0; i < flat.size(); ++i) out.activity[i] += flat[i];
        if (record_output) out.output_steps.push_back(std::move(flat));
    }
    return out;
}

// Tape forward: identical step/layer schedule, recorded for backpropagation
// through time. Parameters must already live on the tape (in slot order).
// `relaxed` replaces every spike with its logistic relaxation for the
// finite-difference oracles.
template <typename T>
Var<T> forward_tape(Tape<T>& tape, const NetworkSpec& spec,
                    const std::vector<Var<T>>& param_vars, const EncodedBatch<T>& input,
                    bool relaxed = false) {
    const auto shapes = layer_shapes(spec);
    const auto slots = param_slots(spec);
    if (param_vars.size() != slots.size())
        throw NetworkError("forward_tape: parameter count does not match network spec");
    const std::size_t bsz = input.batch();
    const T ratio = static_cast<T>(spec.cell.ratio);

    std::vector<const Var<T>*> weight_of(spec.layers.size(), nullptr);
    std::vector<const Var<T>*> bias_of(spec.layers.size(), nullptr);
    for (std::size_t i = 0; i < slots.size(); ++i)
        (slots[i].is_bias ? bias_of : weight_of)[slots[i].layer] = &param_vars[i];

    std::vector<CellVars<T>> states;
    for (std::size_t li = 0; li < spec.layers.size(); ++li)
        if (std::holds_alternative<SpikeLayerSpec>(spec.layers[li]) ||
            std::holds_alternative<EncoderLayerSpec>(spec.layers[li]))
            states.push_back(cell_init_tape(tape, {bsz, shape_size(shapes[li])}));

    Var<T> activity{};
    bool have_activity = false;
    for (std::size_t t = 0; t < input.n_steps; ++t) {
        Var<T> cur = tape.leaf(input.at(t));
        std::size_t cell_idx = 0;
        for (std::size_t li = 0; li < spec.layers.size(); ++li) {
            const LayerSpec& layer = spec.layers[li];
            const Shape in_shape = li == 0 ? spec.input_shape : shapes[li - 1];
            if (const auto* d = std::get_if<DenseSpec>(&layer)) {
                cur = linear(reshape(cur, {bsz, d->in}), *weight_of[li], bias_of[li]);
            } else if (const auto* c = std::get_if<Conv2dSpec>(&layer)) {
                cur = conv2d(reshape(cur, {bsz, in_shape[0], in_shape[1], in_shape[2]}),
                             *weight_of[li], bias_of[li], c->stride, c->pad);
            } else if (const auto* m = std::get_if<MaxPoolSpec>(&layer)) {
                cur = maxpool2d(
                    reshape(cur, {bsz, in_shape[0], in_shape[1], in_shape[2]}), m->k, m->stride);
            } else {
                CellVars<T>& st = states[cell_idx++];
                Var<T> xi = affine(reshape(cur, {bsz, shape_size(shapes[li])}), ratio, T(0));
                st = step_cell_tape(spec.cell, st, xi, relaxed);
                cur = st.s;
            }
        }
        Var<T> flat = reshape(cur, {bsz, spec.output_size()});
        activity = have_activity ? add(activity, flat) : flat;
        have_activity = true;
    }
    return activity;
}

}  // namespace snn
