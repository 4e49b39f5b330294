#include "snn/encoders.hpp"

#include <cmath>

#include "snn/rng.hpp"

namespace snn {

const char* encoding_name(EncodingKind k) {
    switch (k) {
        case EncodingKind::Bernoulli: return "bernoulli";
        case EncodingKind::Periodic: return "periodic";
        case EncodingKind::SingleSpikeDelay: return "delay";
        default: return "analog";
    }
}

EncodingKind encoding_from_name(const std::string& name) {
    if (name == "bernoulli") return EncodingKind::Bernoulli;
    if (name == "periodic") return EncodingKind::Periodic;
    if (name == "delay") return EncodingKind::SingleSpikeDelay;
    if (name == "analog") return EncodingKind::ConstantAnalog;
    throw EncoderError("unknown encoding '" + name + "'");
}

void EncodingSpec::validate() const {
    if (n_steps < 1) throw EncoderError("encoding: n_steps must be at least 1");
}

namespace {

void check_range(const std::vector<double>& x) {
    for (double v : x)
        if (!(v >= 0.0 && v <= 1.0))
            throw EncoderError("encoder input " + std::to_string(v) + " outside [0,1]");
}

}  // namespace

SpikeTrain encode_bernoulli(const std::vector<double>& x, const EncodingSpec& spec) {
    spec.validate();
    check_range(x);
    Rng rng(mix_seed(spec.seed, 0xbe7ull));
    SpikeTrain train(spec.n_steps, x.size());
    for (std::size_t t = 0; t < spec.n_steps; ++t)
        for (std::size_t i = 0; i < x.size(); ++i)
            train.at(t, i) = rng.bernoulli(x[i]) ? 1 : 0;
    return train;
}

SpikeTrain encode_periodic(const std::vector<double>& x, const EncodingSpec& spec) {
    spec.validate();
    check_range(x);
    SpikeTrain train(spec.n_steps, x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0.0) continue;
        const std::size_t period =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(1.0 / x[i])));
        for (std::size_t t = 0; t < spec.n_steps; ++t)
            if ((t + 1) % period == 0) train.at(t, i) = 1;
    }
    return train;
}

SpikeTrain encode_delay(const std::vector<double>& x, const EncodingSpec& spec) {
    spec.validate();
    check_range(x);
    SpikeTrain train(spec.n_steps, x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0.0) continue;
        const double pos = (1.0 - x[i]) * static_cast<double>(spec.n_steps - 1);
        const std::size_t step = static_cast<std::size_t>(std::floor(pos + 0.5));
        train.at(step, i) = 1;
    }
    return train;
}

std::vector<double> encode_analog(const std::vector<double>& x, const EncodingSpec& spec) {
    spec.validate();
    check_range(x);
    return x;
}

SpikeTrain encode(const std::vector<double>& x, const EncodingSpec& spec) {
    switch (spec.kind) {
        case EncodingKind::Bernoulli: return encode_bernoulli(x, spec);
        case EncodingKind::Periodic: return encode_periodic(x, spec);
        case EncodingKind::SingleSpikeDelay: return encode_delay(x, spec);
        default:
            throw EncoderError("constant analog encoding produces a drive, not a spike train");
    }
}

}  // namespace snn
