#pragma once

#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "readorder/core.hpp"

namespace readorder {

// Insertion-ordered so emitted records keep the documented field order.
using json = nlohmann::ordered_json;

namespace detail {

template <typename T>
T field(const json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) throw data_error(std::string("missing field '") + name + "'");
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw data_error(std::string("field '") + name + "': " + e.what());
    }
}

inline bbox box_from_json(const json& j) {
    if (!j.is_array() || j.size() != 4) throw data_error("bbox must be [x0,y0,x1,y1]");
    bbox b;
    try {
        b = {j[0].get<std::int32_t>(), j[1].get<std::int32_t>(), j[2].get<std::int32_t>(),
             j[3].get<std::int32_t>()};
    } catch (const json::exception& e) {
        throw data_error(std::string("bbox: ") + e.what());
    }
    if (!b.valid()) throw data_error("bbox corners out of order or negative");
    return b;
}

} // namespace detail

inline json box_to_json(const bbox& b) { return json::array({b.x0, b.y0, b.x1, b.y1}); }

inline json to_json(const page& p) {
    json words = json::array(), boxes = json::array(), app = json::array();
    for (const auto& t : p.tokens) {
        words.push_back(t.word);
        boxes.push_back(box_to_json(t.box));
        app.push_back(t.appearance_index);
    }
    json j = json::object();
    j["id"] = p.id;
    j["width"] = p.width;
    j["height"] = p.height;
    j["words"] = std::move(words);
    j["bboxes"] = std::move(boxes);
    j["appearance_indices"] = std::move(app);
    return j;
}

inline page page_from_json(const json& j) {
    if (!j.is_object()) throw data_error("page record must be an object");
    page p;
    p.id = detail::field<std::string>(j, "id");
    p.width = detail::field<std::int32_t>(j, "width");
    p.height = detail::field<std::int32_t>(j, "height");
    const auto words = detail::field<std::vector<std::string>>(j, "words");
    const auto app = detail::field<std::vector<std::uint32_t>>(j, "appearance_indices");
    if (!j.contains("bboxes")) throw data_error("missing field 'bboxes'");
    const auto& boxes = j["bboxes"];
    if (!boxes.is_array() || boxes.size() != words.size() || app.size() != words.size())
        throw data_error("page '" + p.id + "': words/bboxes/appearance_indices lengths differ");
    p.tokens.reserve(words.size());
    for (std::size_t i = 0; i < words.size(); ++i)
        p.tokens.push_back({words[i], detail::box_from_json(boxes[i]), app[i]});
    validate(p);
    return p;
}

inline json to_json(const order_prediction& o) {
    json j = json::object();
    j["id"] = o.page_id;
    j["indices"] = o.indices;
    return j;
}

inline order_prediction prediction_from_json(const json& j) {
    if (!j.is_object()) throw data_error("prediction record must be an object");
    return {detail::field<std::string>(j, "id"), detail::field<std::vector<int>>(j, "indices")};
}

inline std::string dump_line(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::strict); }

inline std::vector<json> read_jsonl(std::istream& in, const std::string& what = "input") {
    std::vector<json> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw data_error(what + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

inline std::vector<json> read_jsonl_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open '" + path + "'");
    return read_jsonl(in, path);
}

template <typename T, typename F>
std::vector<T> parse_all(const std::vector<json>& lines, F&& parse, const std::string& what) {
    std::vector<T> out;
    out.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        try {
            out.push_back(parse(lines[i]));
        } catch (const data_error& e) {
            throw data_error(what + ": record " + std::to_string(i + 1) + ": " + e.what());
        } catch (const json::exception& e) {
            throw data_error(what + ": record " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

inline std::vector<page> read_pages(const std::string& path) {
    return parse_all<page>(read_jsonl_file(path), page_from_json, path);
}

inline std::vector<order_prediction> read_predictions(const std::string& path) {
    return parse_all<order_prediction>(read_jsonl_file(path), prediction_from_json, path);
}

inline void write_jsonl(std::ostream& out, const std::vector<json>& lines) {
    for (const auto& j : lines) out << dump_line(j) << '\n';
}

inline void write_jsonl_file(const std::string& path, const std::vector<json>& lines) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write '" + path + "'");
    write_jsonl(out, lines);
    if (!out) throw data_error("write failed for '" + path + "'");
}

template <typename T>
std::vector<json> to_json_lines(const std::vector<T>& items) {
    std::vector<json> out;
    out.reserve(items.size());
    for (const auto& x : items) out.push_back(to_json(x));
    return out;
}

} // namespace readorder
