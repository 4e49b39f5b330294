#include "snn/idx.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include <zlib.h>

namespace snn {

std::vector<double> IdxDataset::input(std::size_t i, std::size_t pad) const {
    const std::size_t pr = rows + 2 * pad, pc = cols + 2 * pad;
    std::vector<double> out(pr * pc, 0.0);
    const std::uint8_t* src = image(i);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            out[(r + pad) * pc + (c + pad)] = src[r * cols + c] / 255.0;
    return out;
}

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IdxError("cannot open '" + path + "'");
    std::vector<std::uint8_t> raw((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
    if (raw.size() >= 2 && raw[0] == 0x1f && raw[1] == 0x8b) {
        // gzip member; inflate with zlib
        std::vector<std::uint8_t> out;
        out.reserve(raw.size() * 4);
        z_stream zs{};
        if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
            throw IdxError("zlib init failed for '" + path + "'");
        zs.next_in = raw.data();
        zs.avail_in = static_cast<uInt>(raw.size());
        std::uint8_t chunk[1 << 16];
        int rc = Z_OK;
        while (rc != Z_STREAM_END) {
            zs.next_out = chunk;
            zs.avail_out = sizeof(chunk);
            rc = inflate(&zs, Z_NO_FLUSH);
            if (rc != Z_OK && rc != Z_STREAM_END) {
                inflateEnd(&zs);
                throw IdxError("gzip data corrupt in '" + path + "'");
            }
            out.insert(out.end(), chunk, chunk + (sizeof(chunk) - zs.avail_out));
        }
        inflateEnd(&zs);
        return out;
    }
    return raw;
}

std::uint32_t be32(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

void be32_write(std::uint8_t* p, std::uint32_t v) {
    p[0] = static_cast<std::uint8_t>(v >> 24);
    p[1] = static_cast<std::uint8_t>(v >> 16);
    p[2] = static_cast<std::uint8_t>(v >> 8);
    p[3] = static_cast<std::uint8_t>(v);
}

}  // namespace

IdxDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    const std::vector<std::uint8_t> img = read_file(images_path);
    const std::vector<std::uint8_t> lab = read_file(labels_path);

    if (img.size() < 16) throw IdxError("'" + images_path + "' truncated (no header)");
    if (be32(img.data()) != 0x00000803u)
        throw IdxError("'" + images_path + "' has bad magic (expected 0x00000803)");
    const std::size_t n = be32(img.data() + 4);
    const std::size_t rows = be32(img.data() + 8);
    const std::size_t cols = be32(img.data() + 12);
    if (img.size() != 16 + n * rows * cols)
        throw IdxError("'" + images_path + "' truncated: header promises " +
                       std::to_string(n * rows * cols) + " pixels, file holds " +
                       std::to_string(img.size() - 16));

    if (lab.size() < 8) throw IdxError("'" + labels_path + "' truncated (no header)");
    if (be32(lab.data()) != 0x00000801u)
        throw IdxError("'" + labels_path + "' has bad magic (expected 0x00000801)");
    const std::size_t n_labels = be32(lab.data() + 4);
    if (lab.size() != 8 + n_labels)
        throw IdxError("'" + labels_path + "' truncated: header promises " +
                       std::to_string(n_labels) + " labels, file holds " +
                       std::to_string(lab.size() - 8));
    if (n != n_labels)
        throw IdxError("image/label count mismatch: " + std::to_string(n) + " images vs " +
                       std::to_string(n_labels) + " labels");

    IdxDataset ds;
    ds.count = n;
    ds.rows = rows;
    ds.cols = cols;
    ds.images.assign(img.begin() + 16, img.end());
    ds.labels.assign(lab.begin() + 8, lab.end());
    return ds;
}

void save_idx(const IdxDataset& ds, const std::string& images_path,
              const std::string& labels_path) {
    {
        std::ofstream out(images_path, std::ios::binary | std::ios::trunc);
        if (!out) throw IdxError("cannot open '" + images_path + "' for writing");
        std::uint8_t header[16];
        be32_write(header, 0x00000803u);
        be32_write(header + 4, static_cast<std::uint32_t>(ds.count));
        be32_write(header + 8, static_cast<std::uint32_t>(ds.rows));
        be32_write(header + 12, static_cast<std::uint32_t>(ds.cols));
        out.write(reinterpret_cast<char*>(header), sizeof(header));
        out.write(reinterpret_cast<const char*>(ds.images.data()),
                  static_cast<std::streamsize>(ds.images.size()));
    }
    std::ofstream out(labels_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IdxError("cannot open '" + labels_path + "' for writing");
    std::uint8_t header[8];
    be32_write(header, 0x00000801u);
    be32_write(header + 4, static_cast<std::uint32_t>(ds.count));
    out.write(reinterpret_cast<char*>(header), sizeof(header));
    out.write(reinterpret_cast<const char*>(ds.labels.data()),
              static_cast<std::streamsize>(ds.labels.size()));
}

IdxPaths find_idx_pair(const std::string& dir, bool train) {
    namespace fs = std::filesystem;
    const std::string img_base = train ? "train-images-idx3-ubyte" : "t10k-images-idx3-ubyte";
    const std::string lab_base = train ? "train-labels-idx1-ubyte" : "t10k-labels-idx1-ubyte";
    for (const char* suffix : {"", ".gz"}) {
        const fs::path img = fs::path(dir) / (img_base + suffix);
        const fs::path lab = fs::path(dir) / (lab_base + suffix);
        if (fs::exists(img) && fs::exists(lab)) return {img.string(), lab.string()};
    }
    return {};
}

}  // namespace snn
