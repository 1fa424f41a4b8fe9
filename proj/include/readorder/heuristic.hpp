#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "readorder/core.hpp"

namespace readorder {

namespace detail {

struct union_find {
    std::vector<int> parent;

    explicit union_find(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

} // namespace detail

// Two boxes sit on one visual line when their vertical overlap covers at least
// half of the shorter box.
inline bool same_visual_line(const bbox& a, const bbox& b) {
    const std::int64_t overlap = std::int64_t(std::min(a.y1, b.y1)) - std::max(a.y0, b.y0);
    if (overlap < 0) return false;
    return 2 * overlap >= std::min(a.height(), b.height());
}

// Visual lines (connected components of same_visual_line), each listed in input
// order. Lines come back sorted by top edge, ties by earliest member.
inline std::vector<std::vector<int>> visual_lines(const std::vector<token>& tokens) {
    const int n = int(tokens.size());
    std::vector<int> by_top(n);
    std::iota(by_top.begin(), by_top.end(), 0);
    std::stable_sort(by_top.begin(), by_top.end(),
                     [&](int a, int b) { return tokens[a].box.y0 < tokens[b].box.y0; });

    // Sweep downward; only boxes whose bottom reaches the current top can overlap it.
    detail::union_find uf(n);
    std::vector<int> active;
    for (int i : by_top) {
        const auto& bi = tokens[i].box;
        std::erase_if(active, [&](int j) { return tokens[j].box.y1 < bi.y0; });
        for (int j : active)
            if (same_visual_line(bi, tokens[j].box)) uf.unite(i, j);
        active.push_back(i);
    }

    std::vector<int> line_of(n, -1);
    std::vector<std::vector<int>> lines;
    for (int i = 0; i < n; ++i) {
        const int root = uf.find(i);
        if (line_of[root] < 0) {
            line_of[root] = int(lines.size());
            lines.emplace_back();
        }
        lines[line_of[root]].push_back(i);
    }
    std::vector<std::int32_t> top(lines.size());
    for (std::size_t l = 0; l < lines.size(); ++l) {
        top[l] = tokens[lines[l].front()].box.y0;
        for (int i : lines[l]) top[l] = std::min(top[l], tokens[i].box.y0);
    }
    std::vector<std::size_t> idx(lines.size());
    std::iota(idx.begin(), idx.end(), std::size_t(0));
    // Lines were created in order of their first member, so stability gives the tie rule.
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return top[a] < top[b]; });
    std::vector<std::vector<int>> sorted;
    sorted.reserve(lines.size());
    for (auto l : idx) sorted.push_back(std::move(lines[l]));
    return sorted;
}

// Left-to-right, top-to-bottom order: indices into `tokens`.
inline std::vector<int> heuristic_order(const std::vector<token>& tokens) {
    std::vector<int> out;
    out.reserve(tokens.size());
    for (auto& line : visual_lines(tokens)) {
        std::stable_sort(line.begin(), line.end(),
                         [&](int a, int b) { return tokens[a].box.x0 < tokens[b].box.x0; });
        out.insert(out.end(), line.begin(), line.end());
    }
    return out;
}

} // namespace readorder
