#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "snn/spike_train.hpp"
#include "snn/tensor.hpp"

namespace snn {

// The four input encodings mapping values in [0,1] to length-N_sp sequences:
// Bernoulli (discrete Poisson equivalent), periodic trains with rate-dependent
// spacing, single-spike delay coding, and constant analog drive.
enum class EncodingKind { Bernoulli, Periodic, SingleSpikeDelay, ConstantAnalog };

const char* encoding_name(EncodingKind k);
EncodingKind encoding_from_name(const std::string& name);

struct EncodingSpec {
    EncodingKind kind = EncodingKind::Bernoulli;
    std::size_t n_steps = 8;      // N_sp
    std::uint64_t seed = 0;       // Bernoulli only

    void validate() const;
};

struct EncoderError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Each bit fires independently with probability x_i; reproducible per seed.
SpikeTrain encode_bernoulli(const std::vector<double>& x, const EncodingSpec& spec);

// Spikes spaced by p = max(1, floor(1/x)); first spike at step p-1; x = 0
// stays silent.
SpikeTrain encode_periodic(const std::vector<double>& x, const EncodingSpec& spec);

// Single spike whose delay shrinks with intensity: step round((1-x)(N_sp-1)),
// half away from zero; x = 0 stays silent.
SpikeTrain encode_delay(const std::vector<double>& x, const EncodingSpec& spec);

// Constant analog drive u_ext = x, entering the drive term as tau * u_ext.
std::vector<double> encode_analog(const std::vector<double>& x, const EncodingSpec& spec);

// Dispatch on spec.kind for the spike-train encoders (ConstantAnalog is an
// error here; it produces a drive, not a train).
SpikeTrain encode(const std::vector<double>& x, const EncodingSpec& spec);

}  // namespace snn
