#include "hierpose/tensor.hpp"

#include "hierpose/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace hierpose {

static_assert(std::endian::native == std::endian::little,
              "tensor dump I/O assumes a little-endian host");

Tensor::Tensor(std::string name_, std::vector<std::uint32_t> dims_)
    : name(std::move(name_)), dims(std::move(dims_)) {
    std::size_t n = 1;
    for (std::uint32_t d : dims) n *= d;
    data.assign(n, 0.0f);
}

namespace {

void put_u16(std::ofstream& out, std::uint16_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void put_u32(std::ofstream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T get(std::ifstream& in, const std::filesystem::path& path) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw std::runtime_error("tensor dump truncated: " + path.string());
    return v;
}

}  // namespace

void write_tensor_dump(const std::filesystem::path& path, std::span<const Tensor> tensors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write("HPRT", 4);
    put_u16(out, kTensorDumpVersion);
    put_u16(out, static_cast<std::uint16_t>(tensors.size()));
    for (const Tensor& t : tensors) {
        if (t.name.size() > 255)
            throw std::invalid_argument("tensor name too long: " + t.name);
        const auto name_len = static_cast<unsigned char>(t.name.size());
        out.write(reinterpret_cast<const char*>(&name_len), 1);
        out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
        const auto rank = static_cast<unsigned char>(t.dims.size());
        out.write(reinterpret_cast<const char*>(&rank), 1);
        for (std::uint32_t d : t.dims) put_u32(out, d);
        out.write(reinterpret_cast<const char*>(t.data.data()),
                  static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    }
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<Tensor> read_tensor_dump(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "HPRT", 4) != 0)
        throw std::runtime_error("not a tensor dump (bad magic): " + path.string());
    const auto version = get<std::uint16_t>(in, path);
    if (version != kTensorDumpVersion)
        throw std::runtime_error("unsupported tensor dump version " + std::to_string(version) +
                                 ": " + path.string());
    const auto count = get<std::uint16_t>(in, path);
    std::vector<Tensor> tensors;
    tensors.reserve(count);
    for (int i = 0; i < count; ++i) {
        const auto name_len = get<unsigned char>(in, path);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        const auto rank = get<unsigned char>(in, path);
        std::vector<std::uint32_t> dims(rank);
        std::size_t n = 1;
        for (int d = 0; d < rank; ++d) {
            dims[d] = get<std::uint32_t>(in, path);
            n *= dims[d];
        }
        Tensor t(std::move(name), std::move(dims));
        in.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(n * sizeof(float)));
        if (!in) throw std::runtime_error("tensor dump truncated: " + path.string());
        tensors.push_back(std::move(t));
    }
    return tensors;
}

}  // namespace hierpose
