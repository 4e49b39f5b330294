#pragma once

#include <stdexcept>
#include <string>

#include "snn/networks.hpp"

namespace snn {

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Spec echo + weights + training metadata. Round-trips bit-exactly: weights
// are stored as raw little-endian float32 blobs with per-tensor shape
// headers, the architecture as canonical JSON, and the file ends in a CRC.
struct ModelCheckpoint {
    NetworkSpec spec;
    NetworkParams params;
    std::string metadata;  // JSON: epochs, beta, ratio, n_out, seed, ...
};

void save_checkpoint(const ModelCheckpoint& ckpt, const std::string& path);
ModelCheckpoint load_checkpoint(const std::string& path);

}  // namespace snn
