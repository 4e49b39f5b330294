#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "snn/cartpole.hpp"
#include "snn/idx.hpp"
#include "snn/training.hpp"
#include "snn/validation.hpp"

namespace snn {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Declarative experiment description. A JSON config file may supply any
// subset of these fields (unknown keys are rejected); command-line flags
// override file values.
struct ExperimentConfig {
    // model
    std::string preset = "shallow";
    std::string model = "I";  // coarse cell variant: I, II, III
    double ratio = 2.0;
    double beta = 3.0;
    std::size_t n_steps = 8;
    bool dense_bias = false;

    // training
    std::string encoding = "bernoulli";  // bernoulli, periodic, delay, analog
    std::string loss = "mse";            // mse, ce
    double n_out = 4;
    std::string optimizer = "adam";      // adam, sgd
    double lr = 0.0;                     // 0 = optimizer default (1e-3 adam, 0.1 sgd)
    std::size_t epochs = 15;
    std::size_t batch_size = 64;
    std::size_t train_limit = 0;
    std::size_t test_limit = 0;

    // evaluation / transfer
    std::string checkpoint;
    std::size_t eval_steps = 0;  // 0 = the checkpoint's training length
    std::size_t repeats = 1;

    // validation experiment
    std::size_t neurons = 300;
    double density = 0.05;
    std::vector<double> ratios = {1.0, 2.0, 5.0};
    std::vector<double> drives = {0.7, 0.9, 1.1, 1.4};
    std::size_t nets_per_point = 3;
    double duration = 400.0;

    // sweeps
    std::vector<double> nout_values = {0, 1, 2, 3, 4, 5, 6};
    std::vector<double> betas = {1, 2, 3, 4, 5};

    // reinforcement learning
    std::size_t hidden = 64;
    double alpha = 1.0;
    std::size_t rl_batches = 80;
    double target_reward = 195.0;

    // plumbing
    std::string dataset = "mnist";  // mnist, fmnist, or an IDX directory
    std::string out_dir;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    bool quiet = false;
};

// Strict JSON round-trip: unknown keys are errors, every field is optional.
ExperimentConfig config_from_json_file(const std::string& path);
void apply_json(ExperimentConfig& cfg, const std::string& json_text);
std::string config_to_json(const ExperimentConfig& cfg);

// Resolves --dataset to IDX file paths: a known name consults
// SNN_MNIST_DIR/SNN_FMNIST_DIR (default ./data/mnist, ./data/fmnist),
// anything else is a directory containing the conventional file names.
struct ResolvedDataset {
    std::string dir;
    IdxPaths train;
    IdxPaths test;
    bool found() const { return train.found() && test.found(); }
};
ResolvedDataset resolve_dataset(const std::string& name);

NetworkSpec spec_from_config(const ExperimentConfig& cfg);
TrainConfig train_config_from(const ExperimentConfig& cfg);

// Drivers behind the CLI subcommands. Each writes its outputs (config echo,
// metrics.csv, summary.json, checkpoints) into cfg.out_dir and returns a
// summary JSON string.
std::string train_driver(const ExperimentConfig& cfg);
std::string eval_driver(const ExperimentConfig& cfg);
std::string transfer_driver(const ExperimentConfig& cfg);
std::string validate_driver(const ExperimentConfig& cfg);
std::string sweep_nout_driver(const ExperimentConfig& cfg);
std::string sweep_beta_driver(const ExperimentConfig& cfg);
std::string rl_driver(const ExperimentConfig& cfg);

}  // namespace snn
