#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "snn/coarse_lif.hpp"
#include "snn/lif_reference.hpp"
#include "snn/tensor.hpp"

namespace snn {

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Randomly connected recurrent network: each directed pair wired with
// probability `density`, Gaussian weights, constant Gaussian external inputs.
struct RandomNetSpec {
    std::size_t n_neurons = 1000;
    double density = 0.05;
    double weight_std = 0.0;   // 0 = v0 / sqrt(density * n), the default scaling
    double input_mean = 0.5;   // u_ext ~ N(mean, (0.2 mean)^2)
    double input_std = -1.0;   // <0 = 0.2 * input_mean
    double ratio = 2.0;        // tau / tau_r
    double duration = 200.0;   // in units of tau_r
    std::uint64_t seed = 0;
    bool zero_delay = false;   // sensitivity variant; default U(0, tau_r] per synapse

    void validate() const;
};

struct RandomNet {
    RecurrentLifNet fine;               // with per-synapse delays
    Tensor<double> weights;             // [n x n] dense mirror for the coarse step
    std::vector<double> u_ext;
};

RandomNet generate_random_net(const RandomNetSpec& spec);

// Firing rates in spikes per unit time (tau_r = 1); the first 20% of the run
// is discarded as warm-up.
std::vector<double> measure_rates_fine(const RandomNet& net, const RandomNetSpec& spec);
std::vector<double> measure_rates_coarse(const RandomNet& net, const RandomNetSpec& spec,
                                         CoarseModel model);

// Standard Pearson correlation; throws on zero variance.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

struct CorrelationRow {
    std::uint64_t seed = 0;
    double ratio = 0;
    double input_mean = 0;
    double mean_activity = 0;  // population-average spikes per tau_r (fine run)
    double r_model_i = 0;
    double r_model_ii = 0;
    double r_model_iii = 0;
    bool degenerate = false;  // zero-variance rates, excluded from stats
};

struct CorrelationExperimentSpec {
    std::size_t n_neurons = 300;
    double density = 0.05;
    std::vector<double> ratios = {1.0, 2.0, 5.0};
    // Mean external drive in threshold units (tau * u / v0); swept to scan
    // the activity axis. u_ext mean = drive / tau so the scan is comparable
    // across ratios.
    std::vector<double> drive_means;
    std::size_t nets_per_point = 4;
    double duration = 400.0;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

// Runs fine + all three coarse models per network instantiation and records
// the per-network Pearson correlation against the network's mean activity.
std::vector<CorrelationRow> correlation_experiment(const CorrelationExperimentSpec& spec);

std::string correlation_csv(const std::vector<CorrelationRow>& rows);

}  // namespace snn
