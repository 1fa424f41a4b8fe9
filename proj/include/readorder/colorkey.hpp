#pragma once

// Color keys for matching a reading sequence against an unordered stream of
// positioned words. Each word carries its appearance index painted as an RGB
// color; the pair (word, color) is then unique on the page.

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "readorder/core.hpp"
#include "readorder/io.hpp"

namespace readorder::colorkey {

struct rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    bool operator==(const rgb&) const = default;
};

inline constexpr std::uint32_t color_space_size = 1u << 24;

inline rgb encode_index(std::uint32_t i) {
    if (i >= color_space_size)
        throw range_error("appearance index " + std::to_string(i) + " does not fit in 24 bits");
    return {std::uint8_t((i >> 16) & 0xFF), std::uint8_t((i >> 8) & 0xFF), std::uint8_t(i & 0xFF)};
}

inline std::uint32_t decode_color(rgb c) {
    return (std::uint32_t(c.r) << 16) | (std::uint32_t(c.g) << 8) | std::uint32_t(c.b);
}

struct sequence_record {
    std::string page_id;
    std::string word;
    std::uint32_t appearance_index = 0;
};

struct layout_record {
    std::string page_id;
    std::string word;
    rgb color;
    readorder::bbox box;
    std::int32_t page_width = 0;
    std::int32_t page_height = 0;
};

// Tokens in sequence order, each carrying the box of its unique layout match
// (same word, color == encode_index(appearance_index)).
inline std::vector<token> align(const std::vector<sequence_record>& seq,
                                const std::vector<layout_record>& layout) {
    if (seq.size() != layout.size())
        throw alignment_error("count mismatch: " + std::to_string(seq.size()) + " sequence records vs " +
                              std::to_string(layout.size()) + " layout records");

    std::unordered_map<token_key, std::size_t, token_key_hash> by_key;
    by_key.reserve(layout.size());
    for (std::size_t i = 0; i < layout.size(); ++i) {
        token_key k{layout[i].word, decode_color(layout[i].color)};
        if (!by_key.emplace(k, i).second)
            throw alignment_error("duplicate layout match for " + describe(k));
    }

    std::vector<token> out;
    out.reserve(seq.size());
    for (const auto& s : seq) {
        // encode_index rejects indices that no color can carry.
        const std::uint32_t code = decode_color(encode_index(s.appearance_index));
        token_key k{s.word, code};
        auto it = by_key.find(k);
        if (it == by_key.end())
            throw alignment_error("unmatched sequence record " + describe({s.word, s.appearance_index}));
        out.push_back({s.word, layout[it->second].box, s.appearance_index});
        by_key.erase(it);
    }
    return out;
}

inline json to_json(const sequence_record& r) {
    json j = json::object();
    j["page_id"] = r.page_id;
    j["word"] = r.word;
    j["appearance_index"] = r.appearance_index;
    return j;
}

inline json to_json(const layout_record& r) {
    json j = json::object();
    j["page_id"] = r.page_id;
    j["word"] = r.word;
    j["color"] = json::array({r.color.r, r.color.g, r.color.b});
    j["bbox"] = box_to_json(r.box);
    j["page_width"] = r.page_width;
    j["page_height"] = r.page_height;
    return j;
}

inline sequence_record sequence_record_from_json(const json& j) {
    if (!j.is_object()) throw data_error("sequence record must be an object");
    return {detail::field<std::string>(j, "page_id"), detail::field<std::string>(j, "word"),
            detail::field<std::uint32_t>(j, "appearance_index")};
}

inline layout_record layout_record_from_json(const json& j) {
    if (!j.is_object()) throw data_error("layout record must be an object");
    layout_record r;
    r.page_id = detail::field<std::string>(j, "page_id");
    r.word = detail::field<std::string>(j, "word");
    const auto c = detail::field<std::vector<int>>(j, "color");
    if (c.size() != 3) throw data_error("color must be [r,g,b]");
    for (int v : c)
        if (v < 0 || v > 255) throw data_error("color channel out of [0,255]");
    r.color = {std::uint8_t(c[0]), std::uint8_t(c[1]), std::uint8_t(c[2])};
    r.box = detail::box_from_json(j.at("bbox"));
    r.page_width = detail::field<std::int32_t>(j, "page_width");
    r.page_height = detail::field<std::int32_t>(j, "page_height");
    if (!r.box.inside(r.page_width, r.page_height))
        throw data_error("layout record for '" + r.word + "': bbox outside page");
    return r;
}

// Sequence and layout records of one page, converted into that page's token stream.
inline std::vector<sequence_record> sequence_records(const page& p) {
    std::vector<sequence_record> out;
    out.reserve(p.size());
    for (const auto& t : p.tokens) out.push_back({p.id, t.word, t.appearance_index});
    return out;
}

inline std::vector<layout_record> layout_records(const page& p, const std::vector<int>& physical_order) {
    std::vector<layout_record> out;
    out.reserve(physical_order.size());
    for (int i : physical_order) {
        const auto& t = p.tokens.at(std::size_t(i));
        out.push_back({p.id, t.word, encode_index(t.appearance_index), t.box, p.width, p.height});
    }
    return out;
}

// Groups two record streams by page id (in first-seen order of the sequence
// stream) and aligns each group into a page.
inline std::vector<page> align_pages(const std::vector<sequence_record>& seq,
                                     const std::vector<layout_record>& layout) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<sequence_record>> seq_by_page;
    for (const auto& s : seq) {
        auto [it, fresh] = seq_by_page.try_emplace(s.page_id);
        if (fresh) order.push_back(s.page_id);
        it->second.push_back(s);
    }
    std::map<std::string, std::vector<layout_record>> layout_by_page;
    for (const auto& l : layout) layout_by_page[l.page_id].push_back(l);
    for (const auto& [id, recs] : layout_by_page)
        if (!seq_by_page.count(id)) throw alignment_error("layout page '" + id + "' has no sequence records");

    std::vector<page> pages;
    pages.reserve(order.size());
    for (const auto& id : order) {
        auto it = layout_by_page.find(id);
        if (it == layout_by_page.end()) throw alignment_error("page '" + id + "' has no layout records");
        const auto& recs = it->second;
        for (const auto& r : recs)
            if (r.page_width != recs.front().page_width || r.page_height != recs.front().page_height)
                throw alignment_error("page '" + id + "': inconsistent page dimensions");
        page p;
        p.id = id;
        p.width = recs.front().page_width;
        p.height = recs.front().page_height;
        try {
            p.tokens = align(seq_by_page[id], recs);
        } catch (const alignment_error& e) {
            throw alignment_error("page '" + id + "': " + e.what());
        }
        validate(p);
        pages.push_back(std::move(p));
    }
    return pages;
}

} // namespace readorder::colorkey
