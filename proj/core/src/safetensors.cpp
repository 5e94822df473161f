#include "metagym/safetensors.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace metagym {

void ParameterMap::add(std::string name, TensorData tensor) {
    std::size_t numel = 1;
    for (std::int64_t d : tensor.shape) {
        if (d < 0) throw std::invalid_argument("negative dimension in '" + name + "'");
        numel *= static_cast<std::size_t>(d);
    }
    if (numel != tensor.data.size())
        throw std::invalid_argument("shape/element-count mismatch in '" + name + "'");
    if (tensors_.count(name))
        throw std::invalid_argument("duplicate parameter name '" + name + "'");
    order_.push_back(name);
    tensors_.emplace(std::move(name), std::move(tensor));
}

const TensorData* ParameterMap::find(const std::string& name) const {
    auto it = tensors_.find(name);
    return it == tensors_.end() ? nullptr : &it->second;
}

ParameterMap load_safetensors(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());

    std::uint64_t header_len = 0;
    unsigned char len_bytes[8];
    if (!in.read(reinterpret_cast<char*>(len_bytes), 8))
        throw std::runtime_error(path.string() + ": truncated header length");
    for (int i = 7; i >= 0; --i) header_len = (header_len << 8) | len_bytes[i];
    if (header_len > (1ull << 31))
        throw std::runtime_error(path.string() + ": implausible header length");

    std::string header(header_len, '\0');
    if (!in.read(header.data(), static_cast<std::streamsize>(header_len)))
        throw std::runtime_error(path.string() + ": truncated header");

    std::vector<char> buffer(std::istreambuf_iterator<char>(in), {});

    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(header);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path.string() + ": bad header JSON: " + e.what());
    }

    ParameterMap params;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "__metadata__") continue;
        const auto& entry = it.value();
        std::string dtype = entry.at("dtype").get<std::string>();
        if (dtype != "F32")
            throw std::runtime_error(path.string() + ": tensor '" + it.key() +
                                     "' has dtype " + dtype + ", only F32 is accepted");
        TensorData t;
        t.shape = entry.at("shape").get<std::vector<std::int64_t>>();
        auto offsets = entry.at("data_offsets").get<std::vector<std::uint64_t>>();
        if (offsets.size() != 2 || offsets[1] < offsets[0] || offsets[1] > buffer.size())
            throw std::runtime_error(path.string() + ": bad data_offsets for '" +
                                     it.key() + "'");
        std::size_t bytes = offsets[1] - offsets[0];
        if (bytes % 4 != 0)
            throw std::runtime_error(path.string() + ": unaligned tensor '" + it.key() +
                                     "'");
        t.data.resize(bytes / 4);
        std::memcpy(t.data.data(), buffer.data() + offsets[0], bytes);
        params.add(it.key(), std::move(t));
    }
    return params;
}

void save_safetensors(const ParameterMap& params, const std::filesystem::path& path) {
    nlohmann::ordered_json header;
    std::uint64_t offset = 0;
    for (const std::string& name : params.names()) {
        const TensorData* t = params.find(name);
        std::uint64_t bytes = static_cast<std::uint64_t>(t->data.size()) * 4;
        header[name] = {{"dtype", "F32"},
                        {"shape", t->shape},
                        {"data_offsets", {offset, offset + bytes}}};
        offset += bytes;
    }

    std::string header_str = header.dump();
    while (header_str.size() % 8 != 0) header_str += ' '; // standard padding

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());

    std::uint64_t header_len = header_str.size();
    unsigned char len_bytes[8];
    for (int i = 0; i < 8; ++i) len_bytes[i] = static_cast<unsigned char>(header_len >> (8 * i));
    out.write(reinterpret_cast<const char*>(len_bytes), 8);
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    for (const std::string& name : params.names()) {
        const TensorData* t = params.find(name);
        out.write(reinterpret_cast<const char*>(t->data.data()),
                  static_cast<std::streamsize>(t->data.size() * 4));
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

} // namespace metagym
