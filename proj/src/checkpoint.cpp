#include "snn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include <zlib.h>

namespace snn {

static_assert(std::endian::native == std::endian::little,
              "checkpoint container assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'N', 'N', 'C', 'K', 'P', 'T', '\x01'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

template <typename T>
void put(std::vector<char>& buf, const T& v) {
    const char* p = reinterpret_cast<const char*>(&v);
    buf.insert(buf.end(), p, p + sizeof(T));
}

void put_bytes(std::vector<char>& buf, const void* data, std::size_t n) {
    const char* p = static_cast<const char*>(data);
    buf.insert(buf.end(), p, p + n);
}

struct Reader {
    const std::vector<char>& buf;
    std::size_t pos = 0;

    template <typename T>
    T get() {
        if (pos + sizeof(T) > buf.size()) throw CheckpointError("checkpoint truncated");
        T v;
        std::memcpy(&v, buf.data() + pos, sizeof(T));
        pos += sizeof(T);
        return v;
    }

    std::string get_string(std::size_t n) {
        if (pos + n > buf.size()) throw CheckpointError("checkpoint truncated");
        std::string s(buf.data() + pos, n);
        pos += n;
        return s;
    }
};

}  // namespace

void save_checkpoint(const ModelCheckpoint& ckpt, const std::string& path) {
    const std::string spec_text = spec_to_json(ckpt.spec);
    std::vector<char> buf;
    put_bytes(buf, kMagic, sizeof(kMagic));
    put(buf, kVersion);
    put(buf, fnv1a(spec_text));
    put(buf, static_cast<std::uint32_t>(spec_text.size()));
    put_bytes(buf, spec_text.data(), spec_text.size());
    put(buf, static_cast<std::uint32_t>(ckpt.metadata.size()));
    put_bytes(buf, ckpt.metadata.data(), ckpt.metadata.size());
    put(buf, static_cast<std::uint32_t>(ckpt.params.tensors.size()));
    for (const Tensor<float>& t : ckpt.params.tensors) {
        put(buf, static_cast<std::uint32_t>(t.shape.size()));
        for (std::size_t d : t.shape) put(buf, static_cast<std::uint64_t>(d));
        put_bytes(buf, t.data.data(), t.data.size() * sizeof(float));
    }
    const std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(0, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(buf.size())));
    put(buf, crc);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open '" + path + "' for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw CheckpointError("short write to '" + path + "'");
}

ModelCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open '" + path + "'");
    std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
    if (buf.size() < sizeof(kMagic) + sizeof(std::uint32_t))
        throw CheckpointError("checkpoint truncated");

    const std::uint32_t stored_crc = [&] {
        std::uint32_t v;
        std::memcpy(&v, buf.data() + buf.size() - sizeof(v), sizeof(v));
        return v;
    }();
    const std::uint32_t actual_crc = static_cast<std::uint32_t>(
        crc32(0, reinterpret_cast<const Bytef*>(buf.data()),
              static_cast<uInt>(buf.size() - sizeof(std::uint32_t))));
    if (stored_crc != actual_crc) throw CheckpointError("checkpoint CRC mismatch (corrupt file)");

    Reader r{buf};
    char magic[8];
    std::memcpy(magic, buf.data(), sizeof(magic));
    r.pos = sizeof(magic);
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw CheckpointError("not a checkpoint file (bad magic)");
    const std::uint32_t version = r.get<std::uint32_t>();
    if (version != kVersion)
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    const std::uint64_t spec_hash = r.get<std::uint64_t>();
    const std::uint32_t spec_len = r.get<std::uint32_t>();
    const std::string spec_text = r.get_string(spec_len);
    if (fnv1a(spec_text) != spec_hash)
        throw CheckpointError("checkpoint spec hash mismatch (version error)");

    ModelCheckpoint ckpt;
    ckpt.spec = spec_from_json(spec_text);
    const std::uint32_t meta_len = r.get<std::uint32_t>();
    ckpt.metadata = r.get_string(meta_len);
    const std::uint32_t n_tensors = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < n_tensors; ++i) {
        const std::uint32_t ndim = r.get<std::uint32_t>();
        Shape shape(ndim);
        for (std::uint32_t d = 0; d < ndim; ++d)
            shape[d] = static_cast<std::size_t>(r.get<std::uint64_t>());
        Tensor<float> t = Tensor<float>::zeros(shape);
        const std::size_t bytes = t.size() * sizeof(float);
        if (r.pos + bytes > buf.size()) throw CheckpointError("checkpoint truncated");
        std::memcpy(t.data.data(), buf.data() + r.pos, bytes);
        r.pos += bytes;
        ckpt.params.tensors.push_back(std::move(t));
    }
    return ckpt;
}

}  // namespace snn
