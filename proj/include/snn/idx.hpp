#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace snn {

struct IdxError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// MNIST-style dataset held as raw bytes; pixels are normalized to [0,1] only
// at encoding time.
struct IdxDataset {
    std::size_t count = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> images;  // count * rows * cols
    std::vector<std::uint8_t> labels;  // count

    const std::uint8_t* image(std::size_t i) const { return images.data() + i * rows * cols; }
    std::size_t label(std::size_t i) const { return labels[i]; }

    // Normalized pixels (bytes / 255) with optional symmetric zero padding.
    std::vector<double> input(std::size_t i, std::size_t pad = 0) const;
};

// Loads an images/labels pair. Files may be raw IDX or gzip-compressed
// (detected from the 0x1f8b magic). Magic numbers 0x00000803 / 0x00000801,
// big-endian dimensions; truncation, bad magic and count mismatch each raise
// a distinct error.
IdxDataset load_idx(const std::string& images_path, const std::string& labels_path);

// Writes a dataset back out as raw IDX files (used by the round-trip tests
// and the synthetic test corpus).
void save_idx(const IdxDataset& ds, const std::string& images_path,
              const std::string& labels_path);

// Looks for a dataset under `dir` with the conventional MNIST file names,
// optionally gzipped. Returns empty paths if not found.
struct IdxPaths {
    std::string images;
    std::string labels;
    bool found() const { return !images.empty(); }
};
IdxPaths find_idx_pair(const std::string& dir, bool train);

}  // namespace snn
