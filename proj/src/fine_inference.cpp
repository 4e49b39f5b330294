#include "snn/fine_inference.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "snn/rng.hpp"

namespace snn {

namespace {

// Conv fan-out: input neuron (ic, iy, ix) reaches every output whose window
// covers it; zero-padding contributes nothing, so padded positions simply
// never appear as sources.
void build_conv_fanout(const Conv2dSpec& c, const Shape& in_shape, const Tensor<float>& w,
                       FineLayer& layer) {
    const std::size_t h = in_shape[1], wd = in_shape[2];
    const std::size_t ho = (h + 2 * c.pad - c.k) / c.stride + 1;
    const std::size_t wo = (wd + 2 * c.pad - c.k) / c.stride + 1;
    layer.n_in = c.in_ch * h * wd;
    layer.n_out = c.out_ch * ho * wo;
    layer.fan_out.assign(layer.n_in, {});
    for (std::size_t oc = 0; oc < c.out_ch; ++oc)
        for (std::size_t oy = 0; oy < ho; ++oy)
            for (std::size_t ox = 0; ox < wo; ++ox) {
                const std::uint32_t target =
                    static_cast<std::uint32_t>((oc * ho + oy) * wo + ox);
                for (std::size_t ic = 0; ic < c.in_ch; ++ic)
                    for (std::size_t ky = 0; ky < c.k; ++ky)
                        for (std::size_t kx = 0; kx < c.k; ++kx) {
                            const std::ptrdiff_t iy =
                                static_cast<std::ptrdiff_t>(oy * c.stride + ky) -
                                static_cast<std::ptrdiff_t>(c.pad);
                            const std::ptrdiff_t ix =
                                static_cast<std::ptrdiff_t>(ox * c.stride + kx) -
                                static_cast<std::ptrdiff_t>(c.pad);
                            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h) || ix < 0 ||
                                ix >= static_cast<std::ptrdiff_t>(wd))
                                continue;
                            const std::size_t input = (ic * h + iy) * wd + ix;
                            const float weight =
                                w.data[((oc * c.in_ch + ic) * c.k + ky) * c.k + kx];
                            layer.fan_out[input].emplace_back(target, weight);
                        }
            }
}

}  // namespace

FineNetwork build_fine_network(const NetworkSpec& spec, const NetworkParams& params) {
    spec.validate();
    const auto shapes = layer_shapes(spec);
    const auto slots = param_slots(spec);
    FineNetwork net;
    net.params.tau_r = 1.0;
    net.params.tau = spec.cell.ratio;
    net.params.v0 = spec.cell.v0;
    net.params.v_reset = 0.0;
    net.n_inputs = shape_size(spec.input_shape);
    net.n_outputs = spec.output_size();

    std::vector<const Tensor<float>*> weight_of(spec.layers.size(), nullptr);
    std::vector<const Tensor<float>*> bias_of(spec.layers.size(), nullptr);
    for (std::size_t i = 0; i < slots.size(); ++i)
        (slots[i].is_bias ? bias_of : weight_of)[slots[i].layer] = &params.tensors[i];

    for (std::size_t li = 0; li < spec.layers.size(); ++li) {
        const LayerSpec& ls = spec.layers[li];
        const Shape in_shape = li == 0 ? spec.input_shape : shapes[li - 1];
        if (std::holds_alternative<SpikeLayerSpec>(ls)) continue;  // absorbed below
        FineLayer layer;
        if (std::holds_alternative<EncoderLayerSpec>(ls)) {
            layer.kind = FineLayer::Kind::Encoder;
            layer.n_in = layer.n_out = shape_size(shapes[li]);
        } else if (const auto* m = std::get_if<MaxPoolSpec>(&ls)) {
            layer.kind = FineLayer::Kind::MaxPool;
            const std::size_t ch = in_shape[0], h = in_shape[1], w = in_shape[2];
            const std::size_t ho = (h - m->k) / m->stride + 1,
                              wo = (w - m->k) / m->stride + 1;
            layer.n_in = ch * h * w;
            layer.n_out = ch * ho * wo;
            layer.pool_inputs.assign(layer.n_out, {});
            for (std::size_t c = 0; c < ch; ++c)
                for (std::size_t oy = 0; oy < ho; ++oy)
                    for (std::size_t ox = 0; ox < wo; ++ox) {
                        auto& inputs = layer.pool_inputs[(c * ho + oy) * wo + ox];
                        for (std::size_t ky = 0; ky < m->k; ++ky)
                            for (std::size_t kx = 0; kx < m->k; ++kx)
                                inputs.push_back(static_cast<std::uint32_t>(
                                    (c * h + oy * m->stride + ky) * w + ox * m->stride + kx));
                    }
        } else {
            // weighted layer; must feed a spiking cell
            if (li + 1 >= spec.layers.size() ||
                !std::holds_alternative<SpikeLayerSpec>(spec.layers[li + 1]))
                throw NetworkError(
                    "fine transfer: weighted layer without a following spiking cell has no "
                    "fine-scale counterpart");
            layer.kind = FineLayer::Kind::Weighted;
            if (const auto* d = std::get_if<DenseSpec>(&ls)) {
                layer.n_in = d->in;
                layer.n_out = d->out;
                const Tensor<float>& w = *weight_of[li];
                layer.fan_out.assign(layer.n_in, {});
                for (std::size_t j = 0; j < d->in; ++j) {
                    auto& fo = layer.fan_out[j];
                    fo.reserve(d->out);
                    for (std::size_t i = 0; i < d->out; ++i)
                        fo.emplace_back(static_cast<std::uint32_t>(i), w.at2(i, j));
                }
            } else {
                build_conv_fanout(std::get<Conv2dSpec>(ls), in_shape, *weight_of[li], layer);
            }
            layer.u_ext.assign(layer.n_out, 0.0);
            if (bias_of[li])
                for (std::size_t i = 0; i < layer.n_out; ++i)
                    layer.u_ext[i] = (*bias_of[li])[i] / net.params.tau_r;
        }
        net.layers.push_back(std::move(layer));
    }
    return net;
}

namespace {

// One LIF neuron driven by a sorted delivery list plus a constant current;
// closed-form integration between events, drive crossings drained lazily.
struct FineNeuron {
    const NeuronParams& p;
    double u;
    double v = 0.0;
    double last = 0.0;
    double refractory_until = -1e300;

    void advance(double t) {
        if (t <= last) return;
        double from = last;
        if (refractory_until > from) {
            v = p.v_reset;
            if (t <= refractory_until) {
                last = t;
                return;
            }
            from = refractory_until;
        }
        v = evolve_free(v, u, t - from, p);
        last = t;
    }

    template <typename Emit>
    void drain_crossings(double until, Emit&& emit) {
        while (true) {
            const double start = std::max(last, refractory_until);
            if (start >= until) return;
            advance(start);
            const double tc = crossing_time(v, u, p);
            if (!std::isfinite(tc) || start + tc > until) return;
            const double t = start + tc;
            emit(t);
            v = p.v_reset;
            last = t;
            refractory_until = t + p.tau_r;
        }
    }

    template <typename Emit>
    void deliver(double t, double w, Emit&& emit) {
        drain_crossings(t, emit);
        if (t < refractory_until) return;  // clamped
        advance(t);
        v += w;
        if (v >= p.v0) {
            emit(t);
            v = p.v_reset;
            last = t;
            refractory_until = t + p.tau_r;
        }
    }
};

// input spikes must be sorted by (time, neuron); output is sorted the same way.
std::vector<SpikeEvent> run_fine_layer(const FineLayer& layer, const NeuronParams& p,
                                       const std::vector<SpikeEvent>& input,
                                       const std::vector<double>* analog, double duration,
                                       std::vector<std::size_t>* counts) {
    std::vector<SpikeEvent> out;
    if (layer.kind == FineLayer::Kind::MaxPool) {
        // a pooled unit fires in an interval iff any pooled neuron fired in it;
        // the pooled spike keeps the earliest contributing time
        const std::size_t intervals = static_cast<std::size_t>(std::ceil(duration / p.tau_r));
        std::vector<double> earliest(layer.n_in * intervals, -1.0);
        for (const SpikeEvent& ev : input) {
            std::size_t n = static_cast<std::size_t>(ev.time / p.tau_r);
            if (n >= intervals) n = intervals - 1;
            double& slot = earliest[ev.neuron * intervals + n];
            if (slot < 0 || ev.time < slot) slot = ev.time;
        }
        for (std::uint32_t o = 0; o < layer.n_out; ++o)
            for (std::size_t n = 0; n < intervals; ++n) {
                double best = -1.0;
                for (std::uint32_t j : layer.pool_inputs[o]) {
                    const double t = earliest[j * intervals + n];
                    if (t >= 0 && (best < 0 || t < best)) best = t;
                }
                if (best >= 0) out.push_back({o, best});
            }
    } else if (layer.kind == FineLayer::Kind::Encoder) {
        // unweighted sensory neurons under constant drive: periodic closed form
        for (std::uint32_t i = 0; i < layer.n_out; ++i) {
            const double u = analog ? (*analog)[i] : 0.0;
            NeuronParams np = p;
            FineNeuron neuron{np, u};
            neuron.drain_crossings(duration, [&](double t) { out.push_back({i, t}); });
        }
    } else {
        // group deliveries per target, preserving input order for ties
        std::vector<std::vector<std::pair<double, double>>> deliveries(layer.n_out);
        for (const SpikeEvent& ev : input)
            for (const auto& [target, w] : layer.fan_out[ev.neuron])
                deliveries[target].emplace_back(ev.time, w);
        for (std::uint32_t i = 0; i < layer.n_out; ++i) {
            FineNeuron neuron{p, layer.u_ext[i]};
            if (analog) {
                // analog input feeding a weighted layer: constant current W x / tau_r
                double drive = 0.0;
                for (std::size_t j = 0; j < layer.n_in; ++j)
                    for (const auto& [target, w] : layer.fan_out[j])
                        if (target == i) drive += w * (*analog)[j];
                neuron.u += drive / p.tau_r;
            }
            auto emit = [&](double t) { out.push_back({i, t}); };
            for (const auto& [t, w] : deliveries[i]) neuron.deliver(t, w, emit);
            neuron.drain_crossings(duration, emit);
        }
    }
    std::sort(out.begin(), out.end(), [](const SpikeEvent& a, const SpikeEvent& b) {
        return a.time != b.time ? a.time < b.time : a.neuron < b.neuron;
    });
    if (counts) {
        counts->assign(layer.n_out, 0);
        for (const SpikeEvent& ev : out) ++(*counts)[ev.neuron];
    }
    return out;
}

std::vector<std::size_t> run_fine(const FineNetwork& net, const std::vector<SpikeEvent>& input,
                                  const std::vector<double>* analog, std::size_t n_steps) {
    // Inputs stop arriving at n_steps * tau_r; each layer is then allowed one
    // extra interval so the feedforward wave can drain before counting ends
    // (threshold crossings lag their causes by a fraction of tau_r per layer).
    double duration = static_cast<double>(n_steps) * net.params.tau_r;
    std::vector<SpikeEvent> cur = input;
    std::vector<std::size_t> counts;
    const std::vector<double>* drive = analog;
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        const bool last = li + 1 == net.layers.size();
        if (li > 0) duration += net.params.tau_r;
        cur = run_fine_layer(net.layers[li], net.params, cur, drive, duration,
                             last ? &counts : nullptr);
        drive = nullptr;  // analog only feeds the first layer
    }
    return counts;
}

}  // namespace

std::vector<std::size_t> fine_counts(const FineNetwork& net, const SpikeTrain& input,
                                     std::size_t n_steps, std::uint64_t jitter_seed) {
    std::vector<SpikeEvent> events;
    for (std::size_t t = 0; t < input.steps; ++t)
        for (std::size_t i = 0; i < input.width; ++i)
            if (input.at(t, i)) {
                double phase = 0.0;
                if (jitter_seed != 0) {
                    Rng rng(mix_seed(jitter_seed, t, i));
                    phase = rng.uniform();
                }
                events.push_back({static_cast<std::uint32_t>(i),
                                  (static_cast<double>(t) + phase) * net.params.tau_r});
            }
    std::sort(events.begin(), events.end(), [](const SpikeEvent& a, const SpikeEvent& b) {
        return a.time != b.time ? a.time < b.time : a.neuron < b.neuron;
    });
    return run_fine(net, events, nullptr, n_steps);
}

std::vector<std::size_t> fine_counts_analog(const FineNetwork& net,
                                            const std::vector<double>& x,
                                            std::size_t n_steps) {
    return run_fine(net, {}, &x, n_steps);
}

double fine_accuracy(const NetworkSpec& spec, const NetworkParams& params,
                     const IdxDataset& data, std::size_t n_steps, EncodingKind encoding,
                     std::uint64_t seed, std::size_t threads, std::size_t limit,
                     bool jitter) {
    const FineNetwork net = build_fine_network(spec, params);
    const std::size_t n = limit ? std::min(limit, data.count) : data.count;
    if (threads < 1) threads = 1;
    std::vector<std::size_t> correct_per_thread(threads, 0);
    auto work = [&](std::size_t tid) {
        for (std::size_t i = tid; i < n; i += threads) {
            const std::vector<double> x = data.input(i, spec.input_pad);
            std::vector<std::size_t> counts;
            if (encoding == EncodingKind::ConstantAnalog) {
                counts = fine_counts_analog(net, x, n_steps);
            } else {
                EncodingSpec enc{encoding, n_steps, mix_seed(seed, 0xe5a1ull, i)};
                counts = fine_counts(net, encode(x, enc), n_steps,
                                     jitter ? mix_seed(seed, 0x71e2ull, i) : 0);
            }
            std::size_t best = 0;
            for (std::size_t c = 1; c < counts.size(); ++c)
                if (counts[c] > counts[best]) best = c;
            if (best == data.label(i)) ++correct_per_thread[tid];
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    std::size_t correct = 0;
    for (std::size_t c : correct_per_thread) correct += c;
    return static_cast<double>(correct) / static_cast<double>(n);
}

}  // namespace snn
