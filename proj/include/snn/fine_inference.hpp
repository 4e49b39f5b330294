#pragma once

#include <cstdint>
#include <vector>

#include "snn/encoders.hpp"
#include "snn/idx.hpp"
#include "snn/lif_reference.hpp"
#include "snn/networks.hpp"

namespace snn {

// A trained coarse network lowered to fine-scale LIF connectivity. Weighted
// layers pair with their following spiking cell: the cell's neurons become
// LIF neurons receiving one delivery of weight w per upstream spike (the
// tau/tau_r drive factor stays in the dynamics, so weights map one-to-one).
// Biases become constant currents b / tau_r.
struct FineLayer {
    enum class Kind { Weighted, MaxPool, Encoder } kind = Kind::Weighted;
    std::size_t n_in = 0, n_out = 0;
    // Weighted: per input neuron, the (target, weight) fan-out.
    std::vector<std::vector<std::pair<std::uint32_t, float>>> fan_out;
    std::vector<double> u_ext;  // constant drive per target neuron
    // MaxPool: per output unit, the pooled input indices.
    std::vector<std::vector<std::uint32_t>> pool_inputs;
};

struct FineNetwork {
    NeuronParams params;  // tau = ratio * tau_r, tau_r = 1, threshold from the cell
    std::vector<FineLayer> layers;
    std::size_t n_inputs = 0;
    std::size_t n_outputs = 0;
};

FineNetwork build_fine_network(const NetworkSpec& spec, const NetworkParams& params);

// Runs one sample for n_steps * tau_r time units and returns output spike
// counts. A spike at coarse step n lands at time (n + u) tau_r with u drawn
// uniformly per spike (seeded): the coarse update is derived by averaging
// over arrival times homogeneously distributed inside each interval, so the
// fine-scale input must be placed the same way for the weights to mean the
// same thing. `jitter_seed = 0` disables the jitter and pins spikes to the
// interval boundaries instead (sensitivity variant).
std::vector<std::size_t> fine_counts(const FineNetwork& net, const SpikeTrain& input,
                                     std::size_t n_steps, std::uint64_t jitter_seed);
std::vector<std::size_t> fine_counts_analog(const FineNetwork& net,
                                            const std::vector<double>& x, std::size_t n_steps);

// Classification accuracy of the transferred network over a dataset
// (argmax of output spike counts, lowest index on ties).
double fine_accuracy(const NetworkSpec& spec, const NetworkParams& params,
                     const IdxDataset& data, std::size_t n_steps, EncodingKind encoding,
                     std::uint64_t seed, std::size_t threads = 1, std::size_t limit = 0,
                     bool jitter = true);

}  // namespace snn
