#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "readorder/error.hpp"

namespace readorder {

// Axis-aligned box in integer page units; (x0, y0) is the top-left corner.
struct bbox {
    std::int32_t x0 = 0;
    std::int32_t y0 = 0;
    std::int32_t x1 = 0;
    std::int32_t y1 = 0;

    std::int32_t width() const { return x1 - x0; }
    std::int32_t height() const { return y1 - y0; }
    std::int64_t area() const { return std::int64_t(width()) * height(); }

    bool valid() const { return x0 >= 0 && y0 >= 0 && x0 <= x1 && y0 <= y1; }
    bool inside(std::int32_t page_width, std::int32_t page_height) const {
        return valid() && x1 <= page_width && y1 <= page_height;
    }

    bool operator==(const bbox&) const = default;
};

inline std::int64_t intersection_area(const bbox& a, const bbox& b) {
    const std::int64_t w = std::int64_t(std::min(a.x1, b.x1)) - std::max(a.x0, b.x0);
    const std::int64_t h = std::int64_t(std::min(a.y1, b.y1)) - std::max(a.y0, b.y0);
    return (w > 0 && h > 0) ? w * h : 0;
}

struct token {
    std::string word;
    readorder::bbox box;
    // Number of earlier occurrences of `word` in reading order.
    std::uint32_t appearance_index = 0;

    bool operator==(const token&) const = default;
};

// A page in gold reading order: the token list order IS the reading sequence.
struct page {
    std::string id;
    std::int32_t width = 0;
    std::int32_t height = 0;
    std::vector<token> tokens;

    std::size_t size() const { return tokens.size(); }
    bool operator==(const page&) const = default;
};

struct order_prediction {
    std::string page_id;
    std::vector<int> indices;

    bool operator==(const order_prediction&) const = default;
};

// (word, appearance_index) identifies a token uniquely within a page.
struct token_key {
    std::string word;
    std::uint32_t appearance_index = 0;

    bool operator==(const token_key&) const = default;
};

struct token_key_hash {
    std::size_t operator()(const token_key& k) const noexcept {
        return std::hash<std::string>{}(k.word) * 1000003u ^ std::hash<std::uint32_t>{}(k.appearance_index);
    }
};

inline token_key key_of(const token& t) { return {t.word, t.appearance_index}; }

inline std::string describe(const token_key& k) {
    return "(\"" + k.word + "\", " + std::to_string(k.appearance_index) + ")";
}

// Appearance index of each word given the words in reading order.
inline std::vector<std::uint32_t> appearance_indices(const std::vector<std::string>& words) {
    std::unordered_map<std::string, std::uint32_t> seen;
    std::vector<std::uint32_t> out;
    out.reserve(words.size());
    for (const auto& w : words) out.push_back(seen[w]++);
    return out;
}

// Throws data_error when a page breaks any structural invariant.
inline void validate(const page& p) {
    if (p.width <= 0 || p.height <= 0)
        throw data_error("page '" + p.id + "': width and height must be positive");
    if (p.tokens.empty()) throw data_error("page '" + p.id + "': no tokens");
    std::unordered_map<token_key, std::size_t, token_key_hash> keys;
    for (std::size_t i = 0; i < p.tokens.size(); ++i) {
        const auto& t = p.tokens[i];
        if (t.word.empty())
            throw data_error("page '" + p.id + "': empty word at " + std::to_string(i));
        if (!t.box.inside(p.width, p.height))
            throw data_error("page '" + p.id + "': bbox of token " + std::to_string(i) + " outside page");
        if (!keys.emplace(key_of(t), i).second)
            throw data_error("page '" + p.id + "': duplicate key " + describe(key_of(t)));
    }
}

// True when every appearance index equals the running count of its word.
inline bool appearance_indices_consistent(const page& p) {
    std::vector<std::string> words;
    words.reserve(p.size());
    for (const auto& t : p.tokens) words.push_back(t.word);
    const auto expected = appearance_indices(words);
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p.tokens[i].appearance_index != expected[i]) return false;
    return true;
}

// Returns p with layout_tokens[p[k]] == page.tokens[k] for every k.
inline std::vector<int> permutation_from_layout_order(const page& pg,
                                                      const std::vector<token>& layout_tokens) {
    if (layout_tokens.size() != pg.tokens.size())
        throw alignment_error("token count mismatch: page has " + std::to_string(pg.tokens.size()) +
                              ", layout has " + std::to_string(layout_tokens.size()));
    std::unordered_map<token_key, int, token_key_hash> where;
    where.reserve(layout_tokens.size());
    for (std::size_t i = 0; i < layout_tokens.size(); ++i) {
        if (!where.emplace(key_of(layout_tokens[i]), int(i)).second)
            throw alignment_error("duplicate layout key " + describe(key_of(layout_tokens[i])));
    }
    std::vector<int> perm;
    perm.reserve(pg.tokens.size());
    for (const auto& t : pg.tokens) {
        auto it = where.find(key_of(t));
        if (it == where.end()) throw alignment_error("no layout token for " + describe(key_of(t)));
        perm.push_back(it->second);
        where.erase(it);
    }
    return perm;
}

// True when v is a permutation of [0, n).
inline bool is_permutation_of_range(const std::vector<int>& v, std::size_t n) {
    if (v.size() != n) return false;
    std::vector<char> seen(n, 0);
    for (int x : v) {
        if (x < 0 || std::size_t(x) >= n || seen[x]) return false;
        seen[x] = 1;
    }
    return true;
}

inline std::vector<int> identity_order(std::size_t n) {
    std::vector<int> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = int(i);
    return v;
}

// Drops repeated indices, keeping first occurrences.
inline std::vector<int> deduplicate(const std::vector<int>& v) {
    std::vector<int> out;
    out.reserve(v.size());
    std::unordered_map<int, char> seen;
    for (int x : v)
        if (seen.emplace(x, 1).second) out.push_back(x);
    return out;
}

// Reorders a page's tokens: result[k] = tokens[order[k]]. Appearance indices are kept.
inline std::vector<token> reorder(const std::vector<token>& tokens, const std::vector<int>& order) {
    std::vector<token> out;
    out.reserve(order.size());
    for (int i : order) out.push_back(tokens.at(std::size_t(i)));
    return out;
}

} // namespace readorder
