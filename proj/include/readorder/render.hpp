#pragma once

// SVG case-study drawings: token boxes numbered by predicted position, green
// where the prediction puts the token at its gold position and red elsewhere.

#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "readorder/core.hpp"

namespace readorder {

inline constexpr const char* correct_fill = "#2ca02c";
inline constexpr const char* incorrect_fill = "#d62728";
inline constexpr const char* gold_fill = "#9ecae1";

namespace detail {

inline std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace detail

// Predicted position of every token (-1 when omitted), after collapsing repeats.
inline std::vector<int> predicted_positions(const page& p, const order_prediction& pred) {
    if (pred.page_id != p.id)
        throw data_error("render: prediction is for '" + pred.page_id + "', page is '" + p.id + "'");
    std::vector<int> pos(p.size(), -1);
    const auto hyp = deduplicate(pred.indices);
    for (std::size_t k = 0; k < hyp.size(); ++k) {
        const int t = hyp[k];
        if (t < 0 || std::size_t(t) >= p.size()) throw data_error("render: index out of range");
        pos[std::size_t(t)] = int(k);
    }
    return pos;
}

// Without a prediction, boxes are numbered by gold order and joined by arrows.
inline std::string render_svg(const page& p, const std::optional<order_prediction>& pred = std::nullopt) {
    std::ostringstream svg;
    const int font = 12;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << p.width << "\" height=\"" << p.height
        << "\" viewBox=\"0 0 " << p.width << ' ' << p.height << "\">\n";
    svg << "<title>" << detail::xml_escape(p.id) << "</title>\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << p.width << "\" height=\"" << p.height << "\" fill=\"white\"/>\n";
    if (!pred) {
        svg << "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"6\" "
               "markerHeight=\"6\" orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"#555\"/></marker></defs>\n";
    }

    const auto positions = pred ? predicted_positions(p, *pred) : identity_order(p.size());
    for (std::size_t t = 0; t < p.size(); ++t) {
        const auto& b = p.tokens[t].box;
        const int k = positions[t];
        const bool correct = k == int(t);
        const char* fill = !pred ? gold_fill : (correct ? correct_fill : incorrect_fill);
        const char* cls = !pred ? "gold" : (correct ? "correct" : "incorrect");
        svg << "<g class=\"token " << cls << "\" data-token=\"" << t << "\">"
            << "<rect x=\"" << b.x0 << "\" y=\"" << b.y0 << "\" width=\"" << b.width() << "\" height=\"" << b.height()
            << "\" fill=\"" << fill << "\" fill-opacity=\"0.6\" stroke=\"#333\"/>"
            << "<text x=\"" << b.x0 + 1 << "\" y=\"" << b.y0 + font << "\" font-size=\"" << font << "\">"
            << (k >= 0 ? std::to_string(k) : std::string("-")) << "</text>"
            << "<title>" << detail::xml_escape(p.tokens[t].word) << "</title></g>\n";
    }
    if (!pred) {
        for (std::size_t t = 0; t + 1 < p.size(); ++t) {
            const auto& a = p.tokens[t].box;
            const auto& b = p.tokens[t + 1].box;
            svg << "<line class=\"order\" x1=\"" << (a.x0 + a.x1) / 2 << "\" y1=\"" << (a.y0 + a.y1) / 2 << "\" x2=\""
                << (b.x0 + b.x1) / 2 << "\" y2=\"" << (b.y0 + b.y1) / 2
                << "\" stroke=\"#555\" stroke-width=\"1\" marker-end=\"url(#arrow)\"/>\n";
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace readorder
