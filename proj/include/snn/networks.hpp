#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "snn/coarse_lif.hpp"
#include "snn/tensor.hpp"

namespace snn {

struct NetworkError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DenseSpec {
    std::size_t in = 0, out = 0;
    bool bias = false;
};

struct Conv2dSpec {
    std::size_t in_ch = 0, out_ch = 0, k = 5, stride = 1, pad = 0;
    bool bias = false;
};

struct MaxPoolSpec {
    std::size_t k = 2, stride = 2;
};

// A coarse LIF cell layer; drives are the preceding layer's outputs scaled by
// tau/tau_r (the factor is kept explicit so trained weights transfer verbatim
// to the fine-scale model).
struct SpikeLayerSpec {};

// Sensory layer: one unweighted spiking neuron per input, driven by the
// constant analog encoding; turns intensities into periodic trains.
struct EncoderLayerSpec {};

using LayerSpec = std::variant<DenseSpec, Conv2dSpec, MaxPoolSpec, SpikeLayerSpec,
                               EncoderLayerSpec>;

struct NetworkSpec {
    std::string preset = "custom";
    std::vector<LayerSpec> layers;
    std::size_t n_steps = 8;  // N_sp
    CoarseCellParams cell;
    Shape input_shape = {1, 28, 28};  // after padding
    std::size_t input_pad = 0;        // symmetric zero pad applied to raw images

    void validate() const;
    std::size_t output_size() const;
};

// Output shape of every layer (validates composition).
std::vector<Shape> layer_shapes(const NetworkSpec& spec);

struct PresetOptions {
    CoarseModel model = CoarseModel::I;
    double ratio = 2.0;
    double beta = 3.0;
    double v0 = 1.0;
    std::size_t n_steps = 8;
    bool dense_bias = false;  // lenet5-spiking only
    bool sensory_layer = false;  // prepend an analog-driven spiking layer
};

// The architectures used in the experiments: shallow, lin-sp-lin-sp,
// conv-sp-lin-sp, conv-sp-conv-sp-lin-sp, lenet5-spiking.
NetworkSpec build_preset(const std::string& name, const PresetOptions& opt = {});

// Trainable tensors in layer order; weighted layers contribute a weight
// tensor followed by a bias tensor when enabled.
struct NetworkParams {
    std::vector<Tensor<float>> tensors;
};

struct ParamSlot {
    std::size_t layer;  // index into spec.layers
    bool is_bias;
    Shape shape;
};

std::vector<ParamSlot> param_slots(const NetworkSpec& spec);

// Kaiming-uniform-style fan-in init, U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
NetworkParams init_params(const NetworkSpec& spec, std::uint64_t seed);

std::size_t count_weights(const NetworkParams& params);

// Canonical JSON round-trip of the architecture (checkpoint spec echo).
std::string spec_to_json(const NetworkSpec& spec);
NetworkSpec spec_from_json(const std::string& text);

}  // namespace snn
