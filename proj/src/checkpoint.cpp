#include "aglsec/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "aglsec/error.hpp"
#include "aglsec/io.hpp"

namespace aglsec {
namespace {

constexpr char kMagic[4] = {'A', 'G', 'L', 'S'};

}  // namespace

void append_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_f64(std::string& out, double v) {
    append_u64(out, std::bit_cast<std::uint64_t>(v));
}

std::uint32_t read_u32(std::string_view bytes, std::size_t& offset) {
    if (offset + 4 > bytes.size()) throw FormatError("checkpoint truncated inside a u32 field");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
    }
    offset += 4;
    return v;
}

std::uint64_t read_u64(std::string_view bytes, std::size_t& offset) {
    if (offset + 8 > bytes.size()) throw FormatError("checkpoint truncated inside a u64 field");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
    }
    offset += 8;
    return v;
}

double read_f64(std::string_view bytes, std::size_t& offset) {
    return std::bit_cast<double>(read_u64(bytes, offset));
}

std::string read_bytes(std::string_view bytes, std::size_t& offset, std::size_t count) {
    if (offset + count > bytes.size()) throw FormatError("checkpoint truncated inside a byte run");
    std::string out(bytes.substr(offset, count));
    offset += count;
    return out;
}

std::string serialize_parameters(const ParameterStore& store) {
    std::string out(kMagic, sizeof(kMagic));
    append_u32(out, kParameterFormatVersion);
    for (const std::string& name : store.names()) {
        const Tensor& t = store.param(name);
        append_u32(out, static_cast<std::uint32_t>(name.size()));
        out.append(name);
        append_u32(out, static_cast<std::uint32_t>(t.rank()));
        for (std::size_t dim : t.shape) append_u64(out, dim);
        for (double x : t.data) append_f64(out, x);
    }
    return out;
}

ParameterStore parse_parameters(std::string_view bytes) {
    std::size_t offset = 0;
    if (read_bytes(bytes, offset, sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
        throw FormatError("not a parameter checkpoint: bad magic bytes");
    }
    const std::uint32_t version = read_u32(bytes, offset);
    if (version != kParameterFormatVersion) {
        throw FormatError("unsupported parameter checkpoint version " + std::to_string(version));
    }

    ParameterStore store;
    while (offset < bytes.size()) {
        const std::uint32_t name_len = read_u32(bytes, offset);
        const std::string name = read_bytes(bytes, offset, name_len);
        if (name.empty()) throw FormatError("checkpoint contains a parameter with empty name");
        const std::uint32_t rank = read_u32(bytes, offset);
        Tensor t;
        std::size_t total = 1;
        for (std::uint32_t i = 0; i < rank; ++i) {
            const std::uint64_t dim = read_u64(bytes, offset);
            if (dim == 0) throw FormatError("checkpoint dimension of zero for '" + name + "'");
            t.shape.push_back(static_cast<std::size_t>(dim));
            total *= static_cast<std::size_t>(dim);
        }
        t.data.resize(total);
        for (std::size_t i = 0; i < total; ++i) t.data[i] = read_f64(bytes, offset);
        if (store.has(name)) throw FormatError("checkpoint repeats parameter '" + name + "'");
        store.add(name, std::move(t));
    }
    return store;
}

void save_parameters(const std::filesystem::path& path, const ParameterStore& store) {
    write_file_atomic(path, serialize_parameters(store));
}

ParameterStore load_parameters(const std::filesystem::path& path) {
    return parse_parameters(read_file(path));
}

}  // namespace aglsec
