#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "readorder/error.hpp"
#include "readorder/io.hpp"

namespace readorder::model {

// Which embedding families feed the encoder.
enum class input_mode { full, text_only, layout_only };

inline std::string_view to_string(input_mode m) {
    switch (m) {
    case input_mode::full: return "full";
    case input_mode::text_only: return "text_only";
    case input_mode::layout_only: return "layout_only";
    }
    return "?";
}

inline input_mode parse_input_mode(std::string_view s) {
    if (s == "full") return input_mode::full;
    if (s == "text_only") return input_mode::text_only;
    if (s == "layout_only") return input_mode::layout_only;
    throw usage_error("unknown mode '" + std::string(s) + "' (expected full|text_only|layout_only)");
}

struct model_config {
    int layers = 2;
    int hidden_dim = 128;
    int heads = 4;
    int ffn_dim = 512;
    int max_tokens_per_page = 128;
    int coord_grid = 1000;
    input_mode mode = input_mode::full;
    int vocab_size = 4096;
    double dropout = 0.0;
    std::uint64_t seed = 0;

    bool uses_words() const { return mode != input_mode::layout_only; }
    bool uses_layout() const { return mode != input_mode::text_only; }
    int head_dim() const { return hidden_dim / heads; }
    // BOS, n source slots and n-1 teacher-forced target slots.
    int max_positions() const { return 2 * max_tokens_per_page; }

    void validate() const {
        if (layers < 0 || hidden_dim < 2 || heads < 1 || ffn_dim < 1)
            throw usage_error("model: layers >= 0, hidden_dim >= 2, heads >= 1, ffn_dim >= 1 required");
        if (hidden_dim % heads != 0) throw usage_error("model: hidden_dim must be divisible by heads");
        if (hidden_dim % 2 != 0) throw usage_error("model: hidden_dim must be even");
        if (coord_grid < 1) throw usage_error("model: coord_grid must be >= 1");
        if (max_tokens_per_page < 1) throw usage_error("model: max_tokens_per_page must be >= 1");
        if (vocab_size < 2) throw usage_error("model: vocab_size must be >= 2");
        if (!(dropout >= 0.0 && dropout < 1.0)) throw usage_error("model: dropout must be in [0,1)");
    }

    bool operator==(const model_config&) const = default;
};

inline json to_json(const model_config& c) {
    json j = json::object();
    j["layers"] = c.layers;
    j["hidden_dim"] = c.hidden_dim;
    j["heads"] = c.heads;
    j["ffn_dim"] = c.ffn_dim;
    j["max_tokens_per_page"] = c.max_tokens_per_page;
    j["coord_grid"] = c.coord_grid;
    j["mode"] = std::string(to_string(c.mode));
    j["vocab_size"] = c.vocab_size;
    j["dropout"] = c.dropout;
    j["seed"] = c.seed;
    return j;
}

// Missing keys keep the values already in `base`.
inline model_config config_from_json(const json& j, model_config base = {}) {
    if (!j.is_object()) throw data_error("model config must be an object");
    try {
        if (j.contains("layers")) base.layers = j["layers"].get<int>();
        if (j.contains("hidden_dim")) base.hidden_dim = j["hidden_dim"].get<int>();
        if (j.contains("heads")) base.heads = j["heads"].get<int>();
        if (j.contains("ffn_dim")) base.ffn_dim = j["ffn_dim"].get<int>();
        if (j.contains("max_tokens_per_page")) base.max_tokens_per_page = j["max_tokens_per_page"].get<int>();
        if (j.contains("coord_grid")) base.coord_grid = j["coord_grid"].get<int>();
        if (j.contains("mode")) base.mode = parse_input_mode(j["mode"].get<std::string>());
        if (j.contains("vocab_size")) base.vocab_size = j["vocab_size"].get<int>();
        if (j.contains("dropout")) base.dropout = j["dropout"].get<double>();
        if (j.contains("seed")) base.seed = j["seed"].get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw data_error(std::string("model config: ") + e.what());
    }
    return base;
}

// Hashed whitespace-token vocabulary; id 0 is reserved for unknown words.
inline int word_id(std::string_view word, int vocab_size) {
    if (word.empty()) return 0;
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : word) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return 1 + int(h % std::uint64_t(vocab_size - 1));
}

} // namespace readorder::model
