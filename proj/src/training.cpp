#include "snn/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <thread>

#include "snn/fine_inference.hpp"
#include "snn/optimizer.hpp"
#include "snn/rng.hpp"

namespace snn {

double loss_mse_count(const std::vector<double>& activity, std::size_t label, double n_out) {
    if (label >= activity.size()) throw TrainingError("loss: label out of range");
    double acc = 0;
    for (std::size_t i = 0; i < activity.size(); ++i) {
        const double target = i == label ? n_out : 0.0;
        const double d = activity[i] - target;
        acc += d * d;
    }
    return acc / static_cast<double>(activity.size());
}

double loss_ce_activity(const std::vector<double>& activity, std::size_t label) {
    if (label >= activity.size()) throw TrainingError("loss: label out of range");
    double mx = activity[0];
    for (double a : activity) mx = std::max(mx, a);
    double lse = 0;
    for (double a : activity) lse += std::exp(a - mx);
    return mx + std::log(lse) - activity[label];
}

EncodedBatch<float> encode_batch(const IdxDataset& data, const std::vector<std::size_t>& idx,
                                 const NetworkSpec& spec, EncodingKind kind, std::uint64_t seed,
                                 std::uint64_t tag, std::size_t n_steps) {
    const std::size_t bsz = idx.size();
    const std::size_t numel = shape_size(spec.input_shape);
    EncodedBatch<float> out;
    out.n_steps = n_steps;
    if (kind == EncodingKind::ConstantAnalog) {
        out.analog = Tensor<float>::zeros({bsz, numel});
        for (std::size_t b = 0; b < bsz; ++b) {
            const std::vector<double> x = data.input(idx[b], spec.input_pad);
            for (std::size_t i = 0; i < numel; ++i)
                out.analog.at2(b, i) = static_cast<float>(x[i]);
        }
        return out;
    }
    out.steps.assign(n_steps, Tensor<float>::zeros({bsz, numel}));
    for (std::size_t b = 0; b < bsz; ++b) {
        const std::vector<double> x = data.input(idx[b], spec.input_pad);
        EncodingSpec enc{kind, n_steps, mix_seed(seed, tag, idx[b])};
        const SpikeTrain train = encode(x, enc);
        for (std::size_t t = 0; t < n_steps; ++t)
            for (std::size_t i = 0; i < numel; ++i)
                if (train.at(t, i)) out.steps[t].at2(b, i) = 1.0f;
    }
    return out;
}

namespace {

Tensor<float> mse_targets(const IdxDataset& data, const std::vector<std::size_t>& idx,
                          std::size_t n_classes, double n_out) {
    Tensor<float> t = Tensor<float>::zeros({idx.size(), n_classes});
    for (std::size_t b = 0; b < idx.size(); ++b) {
        const std::size_t label = data.label(idx[b]);
        if (label >= n_classes) throw TrainingError("loss: label out of range");
        t.at2(b, label) = static_cast<float>(n_out);
    }
    return t;
}

struct BatchGrads {
    double loss = 0.0;
    std::vector<Tensor<float>> grads;
};

// Forward/backward over one shard of a batch. Loss normalizers use the full
// batch size so shard losses and gradients sum to the full-batch values.
BatchGrads run_shard(const NetworkSpec& spec, const NetworkParams& params,
                     const IdxDataset& data, const std::vector<std::size_t>& idx,
                     const TrainConfig& cfg, std::uint64_t tag, std::size_t full_batch) {
    Tape<float> tape;
    std::vector<Var<float>> param_vars;
    param_vars.reserve(params.tensors.size());
    for (const auto& t : params.tensors) param_vars.push_back(tape.leaf(t));
    const EncodedBatch<float> input =
        encode_batch(data, idx, spec, cfg.encoding, cfg.seed, tag, spec.n_steps);
    Var<float> activity = forward_tape(tape, spec, param_vars, input);
    const std::size_t n_classes = spec.output_size();
    Var<float> loss{};
    if (cfg.loss.kind == LossKind::MseSpikeCount) {
        const Tensor<float> targets = mse_targets(data, idx, n_classes, cfg.loss.n_out);
        loss = mse_against(activity, targets,
                           static_cast<float>(full_batch * n_classes));
    } else {
        std::vector<std::size_t> labels(idx.size());
        for (std::size_t b = 0; b < idx.size(); ++b) labels[b] = data.label(idx[b]);
        loss = softmax_cross_entropy(activity, labels, static_cast<float>(full_batch));
    }
    tape.backward(loss);
    BatchGrads out;
    out.loss = loss.value()[0];
    out.grads.reserve(param_vars.size());
    for (const Var<float>& pv : param_vars) out.grads.push_back(pv.grad());
    return out;
}

std::size_t argmax_row(const Tensor<float>& t, std::size_t row) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < t.shape[1]; ++c)
        if (t.at2(row, c) > t.at2(row, best)) best = c;
    return best;
}

}  // namespace

void ensure_finite(double loss, const NetworkParams& params) {
    if (!std::isfinite(loss))
        throw TrainingError("training diverged: non-finite loss");
    for (const auto& t : params.tensors)
        for (float v : t.data)
            if (!std::isfinite(v))
                throw TrainingError("training diverged: non-finite weight");
}

TrainResult train(const NetworkSpec& spec, const IdxDataset& train_set,
                  const IdxDataset& test_set, const TrainConfig& cfg) {
    spec.validate();
    if (cfg.epochs < 1) throw TrainingError("train: epochs must be at least 1");
    NetworkParams params = init_params(spec, cfg.seed);
    Optimizer opt(cfg.optimizer, cfg.lr, params);

    const std::size_t n =
        cfg.train_limit ? std::min(cfg.train_limit, train_set.count) : train_set.count;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        // Fisher-Yates with the deterministic stream
        Rng shuffle_rng(mix_seed(cfg.seed, 0x5f1eull, epoch));
        for (std::size_t i = n; i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);

        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t bsz = std::min(cfg.batch_size, n - start);
            std::vector<std::size_t> idx(order.begin() + start, order.begin() + start + bsz);
            std::vector<Tensor<float>> grads;
            double loss = 0.0;
            const std::size_t threads = std::max<std::size_t>(1, cfg.threads);
            if (threads == 1 || bsz < 2 * threads) {
                BatchGrads bg = run_shard(spec, params, train_set, idx, cfg, epoch, bsz);
                grads = std::move(bg.grads);
                loss = bg.loss;
            } else {
                std::vector<BatchGrads> shard_out(threads);
                std::vector<std::thread> pool;
                const std::size_t per = (bsz + threads - 1) / threads;
                for (std::size_t t = 0; t < threads; ++t) {
                    const std::size_t lo = std::min(bsz, t * per);
                    const std::size_t hi = std::min(bsz, lo + per);
                    if (lo >= hi) continue;
                    std::vector<std::size_t> shard_idx(idx.begin() + lo, idx.begin() + hi);
                    pool.emplace_back([&, t, shard_idx] {
                        shard_out[t] =
                            run_shard(spec, params, train_set, shard_idx, cfg, epoch, bsz);
                    });
                }
                for (auto& th : pool) th.join();
                // deterministic reduction: accumulate in shard order
                for (std::size_t t = 0; t < threads; ++t) {
                    if (shard_out[t].grads.empty()) continue;
                    if (grads.empty()) {
                        grads = std::move(shard_out[t].grads);
                        loss = shard_out[t].loss;
                    } else {
                        for (std::size_t p = 0; p < grads.size(); ++p)
                            for (std::size_t i = 0; i < grads[p].size(); ++i)
                                grads[p][i] += shard_out[t].grads[p][i];
                        loss += shard_out[t].loss;
                    }
                }
            }
            loss_sum += loss * static_cast<double>(bsz);
            seen += bsz;
            opt.step(params, grads);
            ensure_finite(loss, params);
        }

        EpochMetrics metrics;
        metrics.epoch = epoch;
        metrics.train_loss = loss_sum / static_cast<double>(seen);
        if (cfg.eval_each_epoch) {
            metrics.test_accuracy = evaluate(spec, params, test_set, spec.n_steps, cfg.encoding,
                                             mix_seed(cfg.seed, 0xe7a1ull, epoch), cfg.threads,
                                             1, cfg.test_limit)
                                        .accuracy;
        }
        result.metrics.push_back(metrics);
        if (cfg.log) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "epoch %zu/%zu  loss %.6f  test acc %.4f",
                          epoch, cfg.epochs, metrics.train_loss, metrics.test_accuracy);
            cfg.log(buf);
        }
    }
    result.params = std::move(params);
    return result;
}

EvalResult evaluate(const NetworkSpec& spec, const NetworkParams& params,
                    const IdxDataset& data, std::size_t n_steps, EncodingKind encoding,
                    std::uint64_t seed, std::size_t threads, std::size_t repeats,
                    std::size_t limit) {
    spec.validate();
    const std::size_t n = limit ? std::min(limit, data.count) : data.count;
    if (n == 0) throw TrainingError("evaluate: empty dataset");
    if (repeats < 1) repeats = 1;
    if (threads < 1) threads = 1;
    EvalResult result;
    for (std::size_t rep = 0; rep < repeats; ++rep) {
        std::vector<std::size_t> correct_per_thread(threads, 0);
        constexpr std::size_t kChunk = 256;
        const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
        auto work = [&](std::size_t tid) {
            for (std::size_t chunk = tid; chunk < n_chunks; chunk += threads) {
                const std::size_t lo = chunk * kChunk, hi = std::min(n, lo + kChunk);
                std::vector<std::size_t> idx(hi - lo);
                std::iota(idx.begin(), idx.end(), lo);
                const EncodedBatch<float> input =
                    encode_batch(data, idx, spec, encoding, seed, 0xeull + rep, n_steps);
                const ForwardResult<float> fwd = forward_eval(spec, params, input);
                for (std::size_t b = 0; b < idx.size(); ++b)
                    if (argmax_row(fwd.activity, b) == data.label(idx[b]))
                        ++correct_per_thread[tid];
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
        result.per_repeat.push_back(static_cast<double>(correct) / static_cast<double>(n));
    }
    double mean = 0;
    for (double a : result.per_repeat) mean += a;
    mean /= static_cast<double>(repeats);
    double var = 0;
    for (double a : result.per_repeat) var += (a - mean) * (a - mean);
    result.accuracy = mean;
    result.accuracy_std = repeats > 1 ? std::sqrt(var / static_cast<double>(repeats - 1)) : 0.0;
    return result;
}

std::vector<NoutPoint> nout_sweep(const NetworkSpec& base_spec, const IdxDataset& train_set,
                                  const IdxDataset& test_set,
                                  const std::vector<double>& n_out_values, TrainConfig cfg) {
    std::vector<NoutPoint> curve;
    for (double n_out : n_out_values) {
        TrainConfig point_cfg = cfg;
        point_cfg.loss.n_out = n_out;
        if (cfg.log) cfg.log("n_out sweep: training with N_out=" + std::to_string(n_out));
        TrainResult r = train(base_spec, train_set, test_set, point_cfg);
        NoutPoint p;
        p.n_out = n_out;
        p.coarse_accuracy = evaluate(base_spec, r.params, test_set, base_spec.n_steps,
                                     cfg.encoding, mix_seed(cfg.seed, 0xacc0ull), cfg.threads,
                                     1, cfg.test_limit)
                                .accuracy;
        p.fine_accuracy =
            fine_accuracy(base_spec, r.params, test_set, base_spec.n_steps, cfg.encoding,
                          mix_seed(cfg.seed, 0xacc0ull), cfg.threads, cfg.test_limit);
        curve.push_back(p);
    }
    return curve;
}

std::vector<BetaPoint> beta_sweep(const std::string& preset, const IdxDataset& train_set,
                                  const IdxDataset& test_set, const std::vector<double>& betas,
                                  TrainConfig cfg, const PresetOptions& preset_opt) {
    std::vector<BetaPoint> table;
    for (double beta : betas) {
        PresetOptions opt = preset_opt;
        opt.beta = beta;
        const NetworkSpec spec = build_preset(preset, opt);
        if (cfg.log) cfg.log("beta sweep: training with beta=" + std::to_string(beta));
        TrainResult r = train(spec, train_set, test_set, cfg);
        BetaPoint p;
        p.beta = beta;
        p.accuracy = evaluate(spec, r.params, test_set, spec.n_steps, cfg.encoding,
                              mix_seed(cfg.seed, 0xacc0ull), cfg.threads, 1, cfg.test_limit)
                         .accuracy;
        table.push_back(p);
    }
    return table;
}

}  // namespace snn
