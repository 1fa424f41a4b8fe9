#pragma once

// Synthetic page generator with known reading order. Pages are typeset from
// a small Zipf-weighted vocabulary into one of several layout families; the
// emission order of the words is the gold order.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "readorder/adaptation.hpp"
#include "readorder/core.hpp"
#include "readorder/parallel.hpp"
#include "readorder/random.hpp"

namespace readorder::synthgen {

enum class layout_kind { single_column, two_column, three_column, table, mixed };

inline constexpr layout_kind base_kinds[] = {layout_kind::single_column, layout_kind::two_column,
                                             layout_kind::three_column, layout_kind::table};

inline std::string_view to_string(layout_kind k) {
    switch (k) {
    case layout_kind::single_column: return "single_column";
    case layout_kind::two_column: return "two_column";
    case layout_kind::three_column: return "three_column";
    case layout_kind::table: return "table";
    case layout_kind::mixed: return "mixed";
    }
    return "?";
}

inline layout_kind parse_layout_kind(std::string_view s) {
    for (auto k : {layout_kind::single_column, layout_kind::two_column, layout_kind::three_column,
                   layout_kind::table, layout_kind::mixed})
        if (to_string(k) == s) return k;
    throw usage_error("unknown layout kind '" + std::string(s) + "'");
}

inline const std::vector<std::string>& default_vocabulary() {
    static const std::vector<std::string> words = {
        "the", "of", "and", "to", "a", "in", "for", "is", "on", "that", "by", "this", "with", "you", "it",
        "not", "or", "be", "are", "from", "at", "as", "your", "all", "have", "new", "more", "an", "was",
        "we", "will", "home", "can", "us", "about", "if", "page", "my", "has", "search", "free", "but",
        "our", "one", "other", "do", "no", "information", "time", "they", "site", "he", "up", "may",
        "what", "which", "their", "news", "out", "use", "any", "there", "see", "only", "so", "his",
        "when", "contact", "here", "business", "who", "web", "also", "now", "help", "get", "view",
        "online", "first", "been", "would", "how", "were", "me", "services", "some", "these", "click",
        "its", "like", "service", "than", "find", "price", "date", "back", "top", "people", "had",
        "list", "name", "just", "over", "state", "year", "day", "into", "email", "two", "health",
        "world", "next", "used", "go", "work", "last", "most", "products", "music", "buy", "data",
        "make", "them", "should", "product", "system", "post", "her", "city", "add", "policy",
        "number", "such", "please", "available", "copyright", "support", "message", "after", "best",
        "software", "then", "jan", "good", "video", "well", "where", "info", "rights", "public",
        "books", "high", "school", "through", "each", "links", "she", "review", "years", "order",
        "very", "privacy", "book", "items", "company", "read", "group", "need", "many", "user",
        "said", "does", "set", "under", "general", "research", "university", "january", "mail",
        "full", "map", "reviews", "program", "life", "know", "games", "way", "days", "management",
        "part", "could", "great", "united", "hotel", "real", "item", "international", "center",
        "ebay", "must", "store", "travel", "comments", "made", "development", "report", "off",
        "member", "details", "line", "terms", "before", "hotels", "did", "send", "right", "type",
        "because", "local", "those", "using", "results", "office", "education", "national", "car",
        "design", "take", "posted", "internet", "address", "community", "within", "states", "area",
        "want", "phone", "shipping", "reserved", "subject", "between", "forum", "family", "long",
        "based", "code", "show", "even", "black", "check", "special", "prices", "website", "index",
    };
    return words;
}

struct gen_spec {
    layout_kind kind = layout_kind::mixed;
    int tokens_min = 50;
    int tokens_max = 60;
    std::int32_t page_width = 1000;
    std::int32_t page_height = 1414;
    std::int32_t font_height = 36;
    std::int32_t column_gap = 40;
    std::vector<std::string> word_vocab = default_vocabulary();
    std::uint64_t seed = 0;
};

struct generated_page {
    readorder::page page;
    std::vector<line_box> lines;  // in gold reading order
    layout_kind kind = layout_kind::single_column;
};

namespace detail {

struct geometry {
    std::int32_t char_width, space, line_height, paragraph_gap, jitter, margin_x, margin_top, margin_bottom;
};

inline geometry geometry_for(const gen_spec& s) {
    geometry g;
    g.char_width = std::max(1, s.font_height * 2 / 3);
    g.space = g.char_width;
    g.line_height = s.font_height * 3 / 2;
    g.paragraph_gap = s.font_height / 2;
    g.jitter = s.font_height / 10;
    g.margin_x = s.page_width / 12;
    g.margin_top = s.page_height / 14;
    g.margin_bottom = s.page_height / 14;
    return g;
}

struct placed_word {
    std::string word;
    std::int32_t x0, width;
};

// One typeset line relative to its block: words with x offsets, plus the
// vertical advance to the next line.
struct text_line {
    std::vector<placed_word> words;
    std::int32_t advance = 0;
};

class builder {
public:
    builder(const gen_spec& spec, rng& r) : spec_(spec), geo_(geometry_for(spec)), rng_(r) {
        if (spec.word_vocab.empty()) throw data_error("gen: empty vocabulary");
        // Zipf(1) weights over vocabulary rank.
        double acc = 0.0;
        for (std::size_t i = 0; i < spec.word_vocab.size(); ++i) {
            acc += 1.0 / double(i + 1);
            cdf_.push_back(acc);
        }
    }

    const geometry& geo() const { return geo_; }

    std::string draw_word() {
        const double u = rng_.uniform() * cdf_.back();
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return spec_.word_vocab[std::min<std::size_t>(std::size_t(it - cdf_.begin()), cdf_.size() - 1)];
    }

    std::int32_t word_width(const std::string& w) const { return std::int32_t(w.size()) * geo_.char_width; }

    // Greedy line filling within `width`; breaks paragraphs at random.
    std::vector<text_line> typeset(const std::vector<std::string>& words, std::int32_t width,
                                   double paragraph_rate) {
        std::vector<text_line> lines;
        text_line cur;
        std::int32_t x = 0;
        for (const auto& w : words) {
            const std::int32_t ww = word_width(w);
            if (ww > width) throw data_error("gen: word '" + w + "' wider than its column");
            if (!cur.words.empty() && x + geo_.space + ww > width) {
                cur.advance = geo_.line_height;
                lines.push_back(std::move(cur));
                cur = {};
                x = 0;
            }
            if (!cur.words.empty()) x += geo_.space;
            cur.words.push_back({w, x, ww});
            x += ww;
            if (cur.words.size() >= 2 && rng_.bernoulli(paragraph_rate)) {
                cur.advance = geo_.line_height + geo_.paragraph_gap;
                lines.push_back(std::move(cur));
                cur = {};
                x = 0;
            }
        }
        if (!cur.words.empty()) {
            cur.advance = geo_.line_height;
            lines.push_back(std::move(cur));
        }
        return lines;
    }

    // Places lines at (left, top) in order, appending tokens and line boxes.
    std::int32_t place(const std::vector<text_line>& lines, std::int32_t left, std::int32_t top) {
        std::int32_t y = top;
        for (const auto& l : lines) {
            bbox lb{INT32_MAX, INT32_MAX, 0, 0};
            std::string text;
            for (const auto& w : l.words) {
                if (!text.empty()) text += ' ';
                text += w.word;
                const std::int32_t dy = geo_.jitter > 0 ? std::int32_t(rng_.uniform_int(-geo_.jitter, geo_.jitter)) : 0;
                bbox b{left + w.x0, y + dy, left + w.x0 + w.width, y + dy + spec_.font_height};
                words_.push_back(w.word);
                boxes_.push_back(b);
                lb = {std::min(lb.x0, b.x0), std::min(lb.y0, b.y0), std::max(lb.x1, b.x1), std::max(lb.y1, b.y1)};
            }
            line_boxes_.push_back(lb);
            line_texts_.push_back(std::move(text));
            y += l.advance;
        }
        return y;
    }

    // Words no wider than max_width; redraws a bounded number of times.
    std::vector<std::string> draw_words(int n, std::int32_t max_width) {
        std::vector<std::string> out;
        out.reserve(std::size_t(n));
        for (int i = 0; i < n; ++i) {
            std::string w = draw_word();
            for (int tries = 0; word_width(w) > max_width && tries < 64; ++tries) w = draw_word();
            if (word_width(w) > max_width) throw data_error("gen: no vocabulary word fits a column");
            out.push_back(std::move(w));
        }
        return out;
    }

    gen_spec const& spec() const { return spec_; }
    rng& random() { return rng_; }

    std::vector<std::string> words_;
    std::vector<bbox> boxes_;
    std::vector<bbox> line_boxes_;
    std::vector<std::string> line_texts_;

private:
    const gen_spec& spec_;
    geometry geo_;
    rng& rng_;
    std::vector<double> cdf_;
};

// Optional full-width heading; returns the y where the body starts.
inline std::int32_t heading(builder& b, int& remaining, std::int32_t top) {
    if (remaining < 8 || !b.random().bernoulli(0.5)) return top;
    const int n = int(b.random().uniform_int(2, 4));
    remaining -= n;
    const auto& g = b.geo();
    const auto lines = b.typeset(b.draw_words(n, b.spec().page_width - 2 * g.margin_x), b.spec().page_width - 2 * g.margin_x, 0.0);
    return b.place(lines, g.margin_x, top) + g.line_height / 2;
}

inline void columns(builder& b, int n, int cols) {
    const auto& g = b.geo();
    const auto& s = b.spec();
    int remaining = n;
    const std::int32_t top = heading(b, remaining, g.margin_top);
    const std::int32_t usable = s.page_width - 2 * g.margin_x;
    const std::int32_t col_width = (usable - (cols - 1) * s.column_gap) / cols;
    if (col_width <= 0) throw data_error("gen: columns do not fit the page");

    auto lines = b.typeset(b.draw_words(remaining, col_width), col_width, 0.1);
    // Column-major fill: the first ceil(L/cols) lines go left, and so on.
    const std::size_t per_col = (lines.size() + std::size_t(cols) - 1) / std::size_t(cols);
    for (int c = 0; c < cols; ++c) {
        const std::size_t from = std::min(lines.size(), per_col * std::size_t(c));
        const std::size_t to = std::min(lines.size(), from + per_col);
        if (from == to) break;
        // Column starts are staggered so rows of neighbouring columns interleave.
        const std::int32_t offset = c == 0 ? 0 : std::int32_t(b.random().uniform_int(0, g.line_height - 1));
        std::vector<text_line> part(lines.begin() + std::ptrdiff_t(from), lines.begin() + std::ptrdiff_t(to));
        b.place(part, g.margin_x + c * (col_width + s.column_gap), top + offset);
    }
}

inline void table(builder& b, int n) {
    const auto& g = b.geo();
    const auto& s = b.spec();
    int remaining = n;
    std::int32_t y = heading(b, remaining, g.margin_top);
    const int cols = int(b.random().uniform_int(2, 3));
    const std::int32_t usable = s.page_width - 2 * g.margin_x;
    const std::int32_t cell_width = (usable - (cols - 1) * s.column_gap) / cols;
    if (cell_width <= 0) throw data_error("gen: table cells do not fit the page");
    while (remaining > 0) {
        std::vector<std::vector<text_line>> cells;
        for (int c = 0; c < cols && remaining > 0; ++c) {
            const int k = std::min(remaining, int(b.random().uniform_int(1, 4)));
            remaining -= k;
            cells.push_back(b.typeset(b.draw_words(k, cell_width), cell_width, 0.0));
        }
        std::size_t rows = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            rows = std::max(rows, cells[c].size());
            b.place(cells[c], g.margin_x + std::int32_t(c) * (cell_width + s.column_gap), y);
        }
        // Rows are separated by half a line so they read as distinct bands.
        y += std::int32_t(rows) * g.line_height + g.line_height / 2;
    }
}

} // namespace detail

inline std::string page_id_for(const gen_spec& spec, layout_kind kind, std::size_t ordinal) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s-%llu-%06zu", std::string(to_string(kind)).c_str(),
                  static_cast<unsigned long long>(spec.seed), ordinal);
    return buf;
}

// Page `ordinal` of the stream defined by `spec`; depends only on (spec, ordinal).
inline generated_page generate_page(const gen_spec& spec, std::size_t ordinal) {
    if (spec.tokens_min < 1 || spec.tokens_max < spec.tokens_min)
        throw data_error("gen: need 1 <= tokens_min <= tokens_max");
    if (spec.page_width <= 0 || spec.page_height <= 0 || spec.font_height <= 0 || spec.column_gap < 0)
        throw data_error("gen: invalid page geometry");

    rng r(spec.seed, ordinal);
    layout_kind kind = spec.kind;
    if (kind == layout_kind::mixed) kind = base_kinds[r.uniform_int(0, 3)];
    const int n = int(r.uniform_int(spec.tokens_min, spec.tokens_max));

    // Random layouts occasionally run off the page; redraw a bounded number of
    // times before declaring the geometry infeasible.
    const auto fits = [&](const detail::builder& b) {
        const auto& g = b.geo();
        for (const auto& box : b.boxes_)
            if (box.y0 < 0 || box.y1 > spec.page_height - g.margin_bottom + g.jitter || box.x1 > spec.page_width)
                return false;
        return true;
    };
    std::optional<detail::builder> built;
    for (int attempt = 0; attempt < 16 && !built; ++attempt) {
        detail::builder b(spec, r);
        switch (kind) {
        case layout_kind::single_column: detail::columns(b, n, 1); break;
        case layout_kind::two_column: detail::columns(b, n, 2); break;
        case layout_kind::three_column: detail::columns(b, n, 3); break;
        case layout_kind::table: detail::table(b, n); break;
        case layout_kind::mixed: break;
        }
        if (fits(b)) built.emplace(std::move(b));
    }
    if (!built)
        throw data_error("gen: content does not fit on a " + std::to_string(spec.page_width) + "x" +
                         std::to_string(spec.page_height) + " page");
    const auto& b = *built;

    generated_page out;
    out.kind = kind;
    out.page.id = page_id_for(spec, kind, ordinal);
    out.page.width = spec.page_width;
    out.page.height = spec.page_height;
    const auto app = appearance_indices(b.words_);
    for (std::size_t i = 0; i < b.words_.size(); ++i)
        out.page.tokens.push_back({b.words_[i], b.boxes_[i], app[i]});
    for (std::size_t l = 0; l < b.line_boxes_.size(); ++l)
        out.lines.push_back({out.page.id + "-l" + std::to_string(l), out.page.id, b.line_boxes_[l], b.line_texts_[l]});
    validate(out.page);
    return out;
}

inline std::vector<generated_page> generate(const gen_spec& spec, std::size_t count, int jobs = 1) {
    std::vector<generated_page> pages(count);
    parallel_for(count, jobs, [&](std::size_t i) { pages[i] = generate_page(spec, i); });
    return pages;
}

} // namespace readorder::synthgen
