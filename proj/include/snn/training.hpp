#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "snn/encoders.hpp"
#include "snn/idx.hpp"
#include "snn/network_forward.hpp"
#include "snn/networks.hpp"
#include "snn/optimizer.hpp"

namespace snn {

struct TrainingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class LossKind { MseSpikeCount, CrossEntropyActivity };

struct LossSpec {
    LossKind kind = LossKind::MseSpikeCount;
    double n_out = 4;  // target spike count for the correct class
};

struct TrainConfig {
    std::size_t epochs = 15;
    std::size_t batch_size = 64;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double lr = 1e-3;  // 0.1 is the usual choice for plain SGD
    LossSpec loss;
    EncodingKind encoding = EncodingKind::Bernoulli;
    std::uint64_t seed = 0;
    std::size_t threads = 1;     // 1 = strictly sequential reference path
    std::size_t train_limit = 0;  // optional subset sizes for smoke runs
    std::size_t test_limit = 0;
    bool eval_each_epoch = true;
    std::function<void(const std::string&)> log;  // optional progress sink
};

struct EpochMetrics {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double test_accuracy = 0.0;
};

struct TrainResult {
    NetworkParams params;
    std::vector<EpochMetrics> metrics;
};

// Standalone loss evaluations (the differentiable versions live on the tape).
double loss_mse_count(const std::vector<double>& activity, std::size_t label, double n_out);
double loss_ce_activity(const std::vector<double>& activity, std::size_t label);

// Encodes a batch of dataset samples for one presentation. Bernoulli draws a
// fresh stream per (seed, tag, sample index), so encodings are resampled per
// epoch yet reproducible and independent of batch order.
EncodedBatch<float> encode_batch(const IdxDataset& data, const std::vector<std::size_t>& idx,
                                 const NetworkSpec& spec, EncodingKind kind, std::uint64_t seed,
                                 std::uint64_t tag, std::size_t n_steps);

// Divergence guard: throws TrainingError when the loss or any weight has
// gone non-finite.
void ensure_finite(double loss, const NetworkParams& params);

// Minibatch gradient descent over the unrolled network. Deterministic given
// the config seed; aborts with TrainingError if the loss or the weights turn
// non-finite.
TrainResult train(const NetworkSpec& spec, const IdxDataset& train_set,
                  const IdxDataset& test_set, const TrainConfig& cfg);

struct EvalResult {
    double accuracy = 0.0;
    double accuracy_std = 0.0;  // over repeats (stochastic encodings)
    std::vector<double> per_repeat;
};

// Classification by argmax of output activity, ties to the lowest class.
// n_steps may differ from the training length.
EvalResult evaluate(const NetworkSpec& spec, const NetworkParams& params,
                    const IdxDataset& data, std::size_t n_steps, EncodingKind encoding,
                    std::uint64_t seed, std::size_t threads = 1, std::size_t repeats = 1,
                    std::size_t limit = 0);

struct NoutPoint {
    double n_out = 0;
    double coarse_accuracy = 0.0;
    double fine_accuracy = 0.0;
};

// Trains one model per target output spike count and reports coarse and
// fine-transfer accuracy per point.
std::vector<NoutPoint> nout_sweep(const NetworkSpec& base_spec, const IdxDataset& train_set,
                                  const IdxDataset& test_set,
                                  const std::vector<double>& n_out_values, TrainConfig cfg);

struct BetaPoint {
    double beta = 0;
    double accuracy = 0.0;
};

std::vector<BetaPoint> beta_sweep(const std::string& preset, const IdxDataset& train_set,
                                  const IdxDataset& test_set, const std::vector<double>& betas,
                                  TrainConfig cfg, const PresetOptions& preset_opt = {});

}  // namespace snn
