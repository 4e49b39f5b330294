#include "snn/networks.hpp"

#include <cmath>

#include <json.hpp>

#include "snn/kernels.hpp"
#include "snn/rng.hpp"

namespace snn {

using json = nlohmann::ordered_json;

std::vector<Shape> layer_shapes(const NetworkSpec& spec) {
    std::vector<Shape> out;
    Shape cur = spec.input_shape;
    for (std::size_t li = 0; li < spec.layers.size(); ++li) {
        const LayerSpec& layer = spec.layers[li];
        if (const auto* d = std::get_if<DenseSpec>(&layer)) {
            if (shape_size(cur) != d->in)
                throw NetworkError("layer " + std::to_string(li) + ": dense expects " +
                                   std::to_string(d->in) + " inputs, got " + shape_str(cur));
            cur = {d->out};
        } else if (const auto* c = std::get_if<Conv2dSpec>(&layer)) {
            if (cur.size() != 3 || cur[0] != c->in_ch)
                throw NetworkError("layer " + std::to_string(li) + ": conv expects [" +
                                   std::to_string(c->in_ch) + ",H,W], got " + shape_str(cur));
            if (c->stride == 0) throw NetworkError("conv stride must be positive");
            if (c->k > cur[1] + 2 * c->pad || c->k > cur[2] + 2 * c->pad)
                throw NetworkError("conv kernel exceeds padded input");
            cur = {c->out_ch, kernels::conv_out_dim(cur[1], c->k, c->stride, c->pad),
                   kernels::conv_out_dim(cur[2], c->k, c->stride, c->pad)};
        } else if (const auto* m = std::get_if<MaxPoolSpec>(&layer)) {
            if (cur.size() != 3)
                throw NetworkError("layer " + std::to_string(li) + ": maxpool expects [C,H,W]");
            if (m->k > cur[1] || m->k > cur[2])
                throw NetworkError("maxpool window exceeds input");
            cur = {cur[0], (cur[1] - m->k) / m->stride + 1, (cur[2] - m->k) / m->stride + 1};
        } else if (std::holds_alternative<EncoderLayerSpec>(layer)) {
            if (li != 0) throw NetworkError("encoder layer must be first");
        }
        // spike layers keep the shape
        out.push_back(cur);
    }
    return out;
}

void NetworkSpec::validate() const {
    cell.validate();
    if (n_steps < 1) throw NetworkError("network: n_steps must be at least 1");
    if (layers.empty() || !std::holds_alternative<SpikeLayerSpec>(layers.back()))
        throw NetworkError("network: final layer must be a spiking cell");
    layer_shapes(*this);
}

std::size_t NetworkSpec::output_size() const { return shape_size(layer_shapes(*this).back()); }

NetworkSpec build_preset(const std::string& name, const PresetOptions& opt) {
    NetworkSpec spec;
    spec.preset = name;
    spec.n_steps = opt.n_steps;
    spec.cell.model = opt.model;
    spec.cell.ratio = opt.ratio;
    spec.cell.v0 = opt.v0;
    spec.cell.surrogate.beta = opt.beta;
    spec.input_shape = {1, 28, 28};

    auto spike = [] { return LayerSpec{SpikeLayerSpec{}}; };
    if (name == "shallow") {
        spec.layers = {DenseSpec{784, 10, false}, spike()};
    } else if (name == "lin-sp-lin-sp") {
        spec.layers = {DenseSpec{784, 30, false}, spike(), DenseSpec{30, 10, false}, spike()};
    } else if (name == "conv-sp-lin-sp") {
        spec.layers = {Conv2dSpec{1, 4, 5, 2, 2, false}, spike(), DenseSpec{784, 10, false},
                       spike()};
    } else if (name == "conv-sp-conv-sp-lin-sp") {
        spec.layers = {Conv2dSpec{1, 4, 5, 2, 2, false}, spike(),
                       Conv2dSpec{4, 6, 5, 1, 0, false}, spike(), DenseSpec{600, 10, false},
                       spike()};
    } else if (name == "lenet5-spiking") {
        spec.input_pad = 2;  // 28x28 -> 32x32 so the classic 120/84/10 stack fits
        spec.input_shape = {1, 32, 32};
        const bool b = opt.dense_bias;
        spec.layers = {Conv2dSpec{1, 6, 5, 1, 0, false},  spike(), MaxPoolSpec{2, 2},
                       Conv2dSpec{6, 16, 5, 1, 0, false}, spike(), MaxPoolSpec{2, 2},
                       DenseSpec{400, 120, b},            spike(), DenseSpec{120, 84, b},
                       spike(),                           DenseSpec{84, 10, b}, spike()};
    } else {
        throw NetworkError("unknown preset '" + name + "'");
    }
    if (opt.sensory_layer) spec.layers.insert(spec.layers.begin(), EncoderLayerSpec{});
    spec.validate();
    return spec;
}

std::vector<ParamSlot> param_slots(const NetworkSpec& spec) {
    std::vector<ParamSlot> slots;
    for (std::size_t li = 0; li < spec.layers.size(); ++li) {
        if (const auto* d = std::get_if<DenseSpec>(&spec.layers[li])) {
            slots.push_back({li, false, {d->out, d->in}});
            if (d->bias) slots.push_back({li, true, {d->out}});
        } else if (const auto* c = std::get_if<Conv2dSpec>(&spec.layers[li])) {
            slots.push_back({li, false, {c->out_ch, c->in_ch, c->k, c->k}});
            if (c->bias) slots.push_back({li, true, {c->out_ch}});
        }
    }
    return slots;
}

NetworkParams init_params(const NetworkSpec& spec, std::uint64_t seed) {
    NetworkParams params;
    const auto slots = param_slots(spec);
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const ParamSlot& slot = slots[i];
        std::size_t fan_in = 0;
        if (const auto* d = std::get_if<DenseSpec>(&spec.layers[slot.layer]))
            fan_in = d->in;
        else if (const auto* c = std::get_if<Conv2dSpec>(&spec.layers[slot.layer]))
            fan_in = c->in_ch * c->k * c->k;
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Rng rng(mix_seed(seed, 0x1717ull, i));
        Tensor<float> t = Tensor<float>::zeros(slot.shape);
        for (auto& v : t.data) v = static_cast<float>(rng.uniform(-bound, bound));
        params.tensors.push_back(std::move(t));
    }
    return params;
}

std::size_t count_weights(const NetworkParams& params) {
    std::size_t n = 0;
    for (const auto& t : params.tensors) n += t.size();
    return n;
}

// ---------------------------------------------------------------------------
// JSON round-trip
// ---------------------------------------------------------------------------

namespace {

json layer_to_json(const LayerSpec& layer) {
    json j;
    if (const auto* d = std::get_if<DenseSpec>(&layer)) {
        j["type"] = "dense";
        j["in"] = d->in;
        j["out"] = d->out;
        j["bias"] = d->bias;
    } else if (const auto* c = std::get_if<Conv2dSpec>(&layer)) {
        j["type"] = "conv2d";
        j["in_ch"] = c->in_ch;
        j["out_ch"] = c->out_ch;
        j["k"] = c->k;
        j["stride"] = c->stride;
        j["pad"] = c->pad;
        j["bias"] = c->bias;
    } else if (const auto* m = std::get_if<MaxPoolSpec>(&layer)) {
        j["type"] = "maxpool";
        j["k"] = m->k;
        j["stride"] = m->stride;
    } else if (std::holds_alternative<SpikeLayerSpec>(layer)) {
        j["type"] = "spike";
    } else {
        j["type"] = "encoder";
    }
    return j;
}

LayerSpec layer_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "dense")
        return DenseSpec{j.at("in").get<std::size_t>(), j.at("out").get<std::size_t>(),
                         j.at("bias").get<bool>()};
    if (type == "conv2d")
        return Conv2dSpec{j.at("in_ch").get<std::size_t>(), j.at("out_ch").get<std::size_t>(),
                          j.at("k").get<std::size_t>(),     j.at("stride").get<std::size_t>(),
                          j.at("pad").get<std::size_t>(),   j.at("bias").get<bool>()};
    if (type == "maxpool")
        return MaxPoolSpec{j.at("k").get<std::size_t>(), j.at("stride").get<std::size_t>()};
    if (type == "spike") return SpikeLayerSpec{};
    if (type == "encoder") return EncoderLayerSpec{};
    throw NetworkError("unknown layer type '" + type + "' in spec");
}

}  // namespace

std::string spec_to_json(const NetworkSpec& spec) {
    json j;
    j["preset"] = spec.preset;
    j["n_steps"] = spec.n_steps;
    j["model"] = coarse_model_name(spec.cell.model);
    j["ratio"] = spec.cell.ratio;
    j["v0"] = spec.cell.v0;
    j["beta"] = spec.cell.surrogate.beta;
    j["input_shape"] = spec.input_shape;
    j["input_pad"] = spec.input_pad;
    j["layers"] = json::array();
    for (const LayerSpec& layer : spec.layers) j["layers"].push_back(layer_to_json(layer));
    return j.dump();
}

NetworkSpec spec_from_json(const std::string& text) {
    json j = json::parse(text);
    NetworkSpec spec;
    spec.preset = j.at("preset").get<std::string>();
    spec.n_steps = j.at("n_steps").get<std::size_t>();
    const std::string model = j.at("model").get<std::string>();
    spec.cell.model = model == "I"    ? CoarseModel::I
                      : model == "II" ? CoarseModel::II
                                      : CoarseModel::III;
    spec.cell.ratio = j.at("ratio").get<double>();
    spec.cell.v0 = j.at("v0").get<double>();
    spec.cell.surrogate.beta = j.at("beta").get<double>();
    spec.input_shape = j.at("input_shape").get<Shape>();
    spec.input_pad = j.at("input_pad").get<std::size_t>();
    for (const json& lj : j.at("layers")) spec.layers.push_back(layer_from_json(lj));
    spec.validate();
    return spec;
}

}  // namespace snn
