#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "readorder/core.hpp"
#include "readorder/model/config.hpp"
#include "readorder/model/mask.hpp"

namespace readorder::model {

enum class slot_kind : std::uint8_t { bos, source, target };

// Encoder input: [BOS, source tokens..., target slots...]. Target slot j
// re-presents the source token chosen at decoding step j.
struct packed_sequence {
    int n = 0;  // source tokens
    std::vector<slot_kind> kinds;
    std::vector<int> word_ids;
    std::vector<std::array<int, 4>> boxes;  // grid-normalized x0, y0, x1, y1
    std::vector<int> positions;
    // Gold source index at each decoding step (empty when unknown).
    std::vector<int> targets;
    attention_mask mask;

    int length() const { return int(kinds.size()); }
    int n_target_slots() const { return length() - n - 1; }
    // Row whose hidden state predicts step k.
    int query_row(int k) const { return k == 0 ? 0 : n + k; }
};

// floor(coord * grid / extent)
inline int normalize_coord(std::int32_t coord, std::int32_t extent, int grid) {
    return int(std::int64_t(coord) * grid / extent);
}

inline std::array<int, 4> normalize_box(const bbox& b, std::int32_t width, std::int32_t height, int grid) {
    return {normalize_coord(b.x0, width, grid), normalize_coord(b.y0, height, grid),
            normalize_coord(b.x1, width, grid), normalize_coord(b.y1, height, grid)};
}

inline void check_source(const std::vector<token>& source, std::int32_t width, std::int32_t height,
                         const model_config& cfg) {
    if (source.empty()) throw data_error("model: page has no tokens");
    if (int(source.size()) > cfg.max_tokens_per_page)
        throw data_error("truncation: page has " + std::to_string(source.size()) + " tokens, model accepts " +
                         std::to_string(cfg.max_tokens_per_page));
    if (width <= 0 || height <= 0) throw data_error("model: page extent must be positive");
    for (const auto& t : source)
        if (!t.box.inside(width, height)) throw data_error("model: token bbox outside page");
}

// Packs source tokens (in input order) with teacher-forced targets: `targets`
// is the gold order as indices into `source`. An empty `targets` packs the
// source segment alone.
inline packed_sequence pack(const std::vector<token>& source, std::int32_t width, std::int32_t height,
                            const std::vector<int>& targets, const model_config& cfg) {
    check_source(source, width, height, cfg);
    const int n = int(source.size());
    if (!targets.empty() && !is_permutation_of_range(targets, source.size()))
        throw data_error("model: targets must be a permutation of the source");

    packed_sequence s;
    s.n = n;
    s.targets = targets;
    const int n_tgt = targets.empty() ? 0 : n - 1;
    const int L = 1 + n + n_tgt;
    s.kinds.reserve(std::size_t(L));
    s.word_ids.reserve(std::size_t(L));
    s.boxes.reserve(std::size_t(L));
    s.positions.reserve(std::size_t(L));

    s.kinds.push_back(slot_kind::bos);
    s.word_ids.push_back(0);
    s.boxes.push_back({0, 0, 0, 0});
    s.positions.push_back(0);
    auto push = [&](slot_kind kind, const token& t) {
        s.kinds.push_back(kind);
        s.word_ids.push_back(word_id(t.word, cfg.vocab_size));
        s.boxes.push_back(normalize_box(t.box, width, height, cfg.coord_grid));
        s.positions.push_back(int(s.positions.size()));
    };
    for (const auto& t : source) push(slot_kind::source, t);
    for (int j = 0; j < n_tgt; ++j) push(slot_kind::target, source[std::size_t(targets[std::size_t(j)])]);
    s.mask = build_mask(1 + n, n_tgt);
    return s;
}

} // namespace readorder::model
