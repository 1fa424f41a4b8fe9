#pragma once

// Lifts a token-level reading order onto text lines: every token joins the
// line box it overlaps most, and lines are ranked by their earliest member.

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "readorder/core.hpp"
#include "readorder/io.hpp"

namespace readorder {

struct line_box {
    std::string line_id;
    std::string page_id;
    readorder::bbox box;
    std::optional<std::string> text;

    bool operator==(const line_box&) const = default;
};

// members[l] lists the token indices assigned to lines[l], ascending.
struct line_assignment {
    std::vector<std::vector<int>> members;
};

inline line_assignment assign_tokens(const std::vector<token>& tokens, const std::vector<line_box>& lines) {
    if (lines.empty()) throw data_error("assign_tokens: no lines");
    line_assignment a;
    a.members.resize(lines.size());
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        const auto& b = tokens[t].box;
        std::size_t best = 0;
        std::int64_t best_area = 0;
        for (std::size_t l = 0; l < lines.size(); ++l) {
            const auto area = intersection_area(b, lines[l].box);
            if (area > best_area) {
                best_area = area;
                best = l;
            }
        }
        if (best_area == 0) {
            // No overlap anywhere: nearest line by Euclidean center distance
            // (compared in doubled coordinates to stay integral).
            std::int64_t best_dist = std::numeric_limits<std::int64_t>::max();
            const std::int64_t cx = std::int64_t(b.x0) + b.x1, cy = std::int64_t(b.y0) + b.y1;
            for (std::size_t l = 0; l < lines.size(); ++l) {
                const auto& lb = lines[l].box;
                const std::int64_t dx = std::int64_t(lb.x0) + lb.x1 - cx;
                const std::int64_t dy = std::int64_t(lb.y0) + lb.y1 - cy;
                const std::int64_t d = dx * dx + dy * dy;
                if (d < best_dist) {
                    best_dist = d;
                    best = l;
                }
            }
        }
        a.members[best].push_back(int(t));
    }
    return a;
}

// Line indices ranked by the earliest position any member takes in
// token_order. Lines without a ranked member follow, in input order.
inline std::vector<int> order_lines(const line_assignment& a, const std::vector<int>& token_order) {
    std::unordered_map<int, std::size_t> position;
    for (std::size_t k = 0; k < token_order.size(); ++k) position.emplace(token_order[k], k);

    constexpr auto unranked = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> rank(a.members.size(), unranked);
    for (std::size_t l = 0; l < a.members.size(); ++l)
        for (int t : a.members[l]) {
            auto it = position.find(t);
            if (it != position.end()) rank[l] = std::min(rank[l], it->second);
        }
    std::vector<int> order(a.members.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return rank[x] < rank[y]; });
    return order;
}

inline json to_json(const line_box& l) {
    json j = json::object();
    j["id"] = l.line_id;
    j["page_id"] = l.page_id;
    j["bbox"] = box_to_json(l.box);
    if (l.text) j["text"] = *l.text;
    return j;
}

inline line_box line_box_from_json(const json& j) {
    if (!j.is_object()) throw data_error("line record must be an object");
    line_box l;
    l.line_id = detail::field<std::string>(j, "id");
    l.page_id = detail::field<std::string>(j, "page_id");
    l.box = detail::box_from_json(j.at("bbox"));
    if (j.contains("text") && !j["text"].is_null()) l.text = detail::field<std::string>(j, "text");
    return l;
}

struct line_order {
    std::string page_id;
    std::vector<std::string> line_ids;
    std::vector<int> indices;  // positions within the page's line list
};

inline json to_json(const line_order& o) {
    json j = json::object();
    j["id"] = o.page_id;
    j["line_ids"] = o.line_ids;
    j["indices"] = o.indices;
    return j;
}

inline line_order adapt_lines(const page& p, const std::vector<line_box>& lines,
                              const std::vector<int>& token_order) {
    const auto order = order_lines(assign_tokens(p.tokens, lines), token_order);
    line_order out{p.id, {}, order};
    out.line_ids.reserve(order.size());
    for (int l : order) out.line_ids.push_back(lines[std::size_t(l)].line_id);
    return out;
}

} // namespace readorder
