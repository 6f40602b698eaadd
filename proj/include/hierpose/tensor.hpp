#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hierpose {

/// Dense float32 tensor, row-major. Branch maps use rank 3 with dims [C, H, W].
struct Tensor {
    std::string name;
    std::vector<std::uint32_t> dims;
    std::vector<float> data;

    Tensor() = default;
    Tensor(std::string name, std::vector<std::uint32_t> dims);

    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }

    int channels() const { return dims.empty() ? 0 : static_cast<int>(dims[0]); }
    int height() const { return dims.size() < 2 ? 0 : static_cast<int>(dims[1]); }
    int width() const { return dims.size() < 3 ? 0 : static_cast<int>(dims[2]); }

    float& at(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * dims[1] + y) * dims[2] + x];
    }
    float at(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * dims[1] + y) * dims[2] + x];
    }

    std::span<float> plane(int c) {
        const std::size_t n = static_cast<std::size_t>(height()) * width();
        return {data.data() + c * n, n};
    }
    std::span<const float> plane(int c) const {
        const std::size_t n = static_cast<std::size_t>(height()) * width();
        return {data.data() + c * n, n};
    }

    bool same_shape(const Tensor& other) const { return dims == other.dims; }
};

/// Binary tensor dump: magic "HPRT", format version u16, tensor count u16,
/// then per tensor: name length u8 + name bytes, rank u8, dims u32 LE,
/// payload f32 LE row-major.
inline constexpr std::uint16_t kTensorDumpVersion = 1;

void write_tensor_dump(const std::filesystem::path& path, std::span<const Tensor> tensors);
std::vector<Tensor> read_tensor_dump(const std::filesystem::path& path);

}  // namespace hierpose
