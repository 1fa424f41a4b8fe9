#pragma once

// Checkpoint layout (all integers little-endian):
//   8 bytes  magic "RDORDCKP"
//   u32      format version
//   u32      header length, followed by that many bytes of UTF-8 JSON
//   u64      parameter count, followed by that many float32 values

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "readorder/model/network.hpp"

namespace readorder::model {

inline constexpr std::array<char, 8> checkpoint_magic = {'R', 'D', 'O', 'R', 'D', 'C', 'K', 'P'};
inline constexpr std::uint32_t checkpoint_version = 1;

namespace detail {

template <typename U>
void put_le(std::ostream& out, U value) {
    unsigned char bytes[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

template <typename U>
U get_le(std::istream& in) {
    unsigned char bytes[sizeof(U)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) throw data_error("checkpoint: truncated");
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= U(bytes[i]) << (8 * i);
    return v;
}

} // namespace detail

struct checkpoint {
    model_config config;
    json metadata = json::object();  // free-form (training options, report)
    flat_vector<float> parameters;
};

inline void write_checkpoint(std::ostream& out, const checkpoint& ck) {
    json header = json::object();
    header["config"] = to_json(ck.config);
    header["metadata"] = ck.metadata;
    const std::string text = header.dump();
    out.write(checkpoint_magic.data(), checkpoint_magic.size());
    detail::put_le<std::uint32_t>(out, checkpoint_version);
    detail::put_le<std::uint32_t>(out, std::uint32_t(text.size()));
    out.write(text.data(), std::streamsize(text.size()));
    detail::put_le<std::uint64_t>(out, ck.parameters.size());
    for (float f : ck.parameters) detail::put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
}

inline checkpoint read_checkpoint(std::istream& in) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != checkpoint_magic) throw data_error("checkpoint: bad magic");
    const auto version = detail::get_le<std::uint32_t>(in);
    if (version != checkpoint_version) throw data_error("checkpoint: unsupported version " + std::to_string(version));
    const auto len = detail::get_le<std::uint32_t>(in);
    std::string text(len, '\0');
    if (!in.read(text.data(), len)) throw data_error("checkpoint: truncated header");
    checkpoint ck;
    try {
        const json header = json::parse(text);
        ck.config = config_from_json(header.at("config"));
        if (header.contains("metadata")) ck.metadata = header["metadata"];
    } catch (const json::exception& e) {
        throw data_error(std::string("checkpoint header: ") + e.what());
    }
    ck.config.validate();
    const auto count = detail::get_le<std::uint64_t>(in);
    if (count != param_layout(ck.config).total) throw data_error("checkpoint: parameter count does not match config");
    ck.parameters.resize(count);
    for (auto& f : ck.parameters) f = std::bit_cast<float>(detail::get_le<std::uint32_t>(in));
    return ck;
}

inline void save_model(const std::string& path, const layout_reader<float>& model, const json& metadata = json::object()) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write '" + path + "'");
    write_checkpoint(out, {model.config(), metadata, model.parameters()});
    if (!out) throw data_error("write failed for '" + path + "'");
}

inline layout_reader<float> load_model(const std::string& path, json* metadata = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open '" + path + "'");
    auto ck = read_checkpoint(in);
    if (metadata) *metadata = ck.metadata;
    return layout_reader<float>(ck.config, std::move(ck.parameters));
}

} // namespace readorder::model
