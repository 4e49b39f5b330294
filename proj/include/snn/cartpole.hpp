#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "snn/networks.hpp"
#include "snn/rng.hpp"

namespace snn {

struct CartpoleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Canonical cartpole benchmark: Euler-integrated pole-on-cart physics,
// episode ends past +/-2.4 m, +/-12 degrees, or 200 steps.
struct CartpoleState {
    double x = 0;
    double x_dot = 0;
    double theta = 0;
    double theta_dot = 0;
};

struct CartpoleEnv {
    static constexpr double kGravity = 9.8;
    static constexpr double kMassCart = 1.0;
    static constexpr double kMassPole = 0.1;
    static constexpr double kHalfLength = 0.5;
    static constexpr double kForce = 10.0;
    static constexpr double kDt = 0.02;
    static constexpr double kXLimit = 2.4;
    static constexpr double kThetaLimit = 12.0 * 3.14159265358979323846 / 180.0;
    static constexpr std::size_t kMaxSteps = 200;

    CartpoleState state;
    std::size_t steps = 0;
    bool done = false;

    void reset(std::uint64_t seed);  // uniform in [-0.05, 0.05]^4
    void step(int action);           // 0 = push left, 1 = push right
};

// 4 -> 64 -> 2 spiking policy: the observation enters as constant analog
// drive, hidden and output layers are coarse spiking cells, and the output
// spike counts map to action probabilities via y = sigma(alpha (n_s - N/2)).
struct PolicyConfig {
    std::size_t hidden = 64;
    std::size_t n_steps = 8;
    double alpha = 1.0;
    CoarseModel model = CoarseModel::I;
    double ratio = 2.0;
    double beta = 3.0;
};

NetworkSpec build_policy_spec(const PolicyConfig& cfg);

// y = sigma(alpha (n_s - N_sp/2)): maps an output spike count to its
// (unnormalized) action value.
double policy_output_map(double spike_count, double alpha, std::size_t n_sp);

struct Decision {
    int action = 0;
    double prob_right = 0.5;          // normalized probability of action 1
    std::vector<double> spike_counts;  // n_s per output
};

// Normalizes the observation, runs the N_sp-step forward pass, maps counts
// through the logistic and samples from the normalized two-class
// probabilities.
Decision policy_decision(const NetworkSpec& spec, const NetworkParams& params,
                         const PolicyConfig& cfg, const CartpoleState& state, Rng& rng);

struct CemConfig {
    PolicyConfig policy;
    std::size_t batch_episodes = 32;
    double elite_fraction = 0.30;
    std::size_t max_batches = 80;
    double target_reward = 195.0;  // 100-episode moving average
    std::size_t train_epochs = 4;  // passes over the elite set per batch
    std::size_t train_batch = 128;
    double lr = 1e-2;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    std::function<void(const std::string&)> log;
};

struct BatchStats {
    std::size_t batch = 0;
    double mean_reward = 0;
    double p70_reward = 0;
    double moving_avg_100 = 0;
};

struct CemResult {
    NetworkParams params;
    std::vector<BatchStats> curve;
    bool solved = false;
    std::size_t batches_used = 0;
};

// Elite episode indices under the 70th-percentile rule (reward >= threshold,
// ties included). Exposed for the unit tests.
std::vector<std::size_t> elite_indices(const std::vector<double>& rewards,
                                       double elite_fraction);

// Cross-entropy method: roll a batch with the stochastic policy, imitate the
// elite (state -> action) pairs with a cross-entropy loss backpropagated
// through the spike trains, repeat until solved or the batch cap.
CemResult cem_train(const CemConfig& cfg);

}  // namespace snn
