#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace metagym {

struct TensorData {
    std::vector<std::int64_t> shape;
    std::vector<float> data; // element count == product of shape dims

    friend bool operator==(const TensorData&, const TensorData&) = default;
};

// Name -> tensor collection preserving insertion order.
class ParameterMap {
public:
    void add(std::string name, TensorData tensor); // rejects duplicate names
    const TensorData* find(const std::string& name) const;
    std::span<const std::string> names() const { return order_; }
    std::size_t size() const { return order_.size(); }

private:
    std::vector<std::string> order_;
    std::unordered_map<std::string, TensorData> tensors_;
};

// safetensors container: 8-byte little-endian header length, JSON header
// mapping name -> {dtype, shape, data_offsets}, then the raw buffer.
// Only dtype F32 is accepted; anything else is rejected, not coerced.
ParameterMap load_safetensors(const std::filesystem::path& path);
void save_safetensors(const ParameterMap& params, const std::filesystem::path& path);

} // namespace metagym
