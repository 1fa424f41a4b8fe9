#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "readorder/core.hpp"
#include "readorder/heuristic.hpp"
#include "readorder/model/network.hpp"
#include "readorder/model/pointer.hpp"
#include "readorder/random.hpp"

namespace readorder::model {

struct decode_options {
    // Mask already-emitted indices so the output is a permutation.
    bool constrained = true;
    int beam = 1;
};

namespace detail {

template <typename T>
void mask_emitted(row_vector<T>& logits, const std::vector<char>& emitted) {
    for (int i = 0; i < logits.cols(); ++i)
        if (emitted[std::size_t(i)]) logits(i) = nn::neg_inf<T>;
}

template <typename T>
struct hypothesis {
    std::vector<int> sequence;
    std::vector<char> emitted;
    double score = 0.0;
    kv_cache<T> cache;
    row_vector<T> next_logits;
};

} // namespace detail

// Beam search over source indices; beam == 1 is greedy. Returns indices into
// the encoded source, one per step, n steps.
template <typename T>
std::vector<int> decode(const layout_reader<T>& model, const source_encoding<T>& enc, const decode_options& opt) {
    if (opt.beam < 1) throw usage_error("decode: beam must be >= 1");
    const int n = enc.n;
    std::vector<detail::hypothesis<T>> beam(1);
    beam[0].emitted.assign(std::size_t(n), 0);
    beam[0].cache = enc.cache;
    beam[0].next_logits = model.first_step_logits(enc);

    struct candidate {
        double score;
        int parent;
        int index;
    };
    for (int step = 0; step < n; ++step) {
        std::vector<candidate> cands;
        for (int b = 0; b < int(beam.size()); ++b) {
            row_vector<T> logits = beam[std::size_t(b)].next_logits;
            if (opt.constrained) detail::mask_emitted(logits, beam[std::size_t(b)].emitted);
            const row_vector<T> lp = log_softmax(logits);
            for (int i = 0; i < n; ++i)
                if (!(opt.constrained && beam[std::size_t(b)].emitted[std::size_t(i)]))
                    cands.push_back({beam[std::size_t(b)].score + double(lp(i)), b, i});
        }
        // Highest score first; ties go to the earlier parent, then the lower index.
        std::stable_sort(cands.begin(), cands.end(), [](const candidate& a, const candidate& b) { return a.score > b.score; });
        if (int(cands.size()) > opt.beam) cands.resize(std::size_t(opt.beam));

        std::vector<detail::hypothesis<T>> next;
        next.reserve(cands.size());
        for (const auto& c : cands) {
            const auto& parent = beam[std::size_t(c.parent)];
            detail::hypothesis<T> h;
            h.sequence = parent.sequence;
            h.sequence.push_back(c.index);
            h.emitted = parent.emitted;
            h.emitted[std::size_t(c.index)] = 1;
            h.score = c.score;
            if (step + 1 < n) {
                h.cache = parent.cache;
                h.next_logits = model.step_logits(enc, h.cache, step, c.index);
            }
            next.push_back(std::move(h));
        }
        beam = std::move(next);
    }
    return beam.front().sequence;
}

template <typename T>
std::vector<int> decode(const layout_reader<T>& model, const std::vector<token>& source, std::int32_t width,
                        std::int32_t height, const decode_options& opt) {
    return decode(model, model.encode_source(source, width, height), opt);
}

// How the page's tokens are arranged before they reach the model.
enum class input_order { heuristic, shuffled, given };

inline input_order parse_input_order(std::string_view s) {
    if (s == "heuristic") return input_order::heuristic;
    if (s == "shuffled") return input_order::shuffled;
    if (s == "given") return input_order::given;
    throw usage_error("unknown input order '" + std::string(s) + "' (expected heuristic|shuffled|given)");
}

inline std::uint64_t stable_hash(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Page indices in the order presented to the model.
inline std::vector<int> source_order(const page& p, input_order order, std::uint64_t seed) {
    switch (order) {
    case input_order::heuristic: return heuristic_order(p.tokens);
    case input_order::shuffled: {
        rng r(seed, stable_hash(p.id));
        return r.permutation(p.size());
    }
    case input_order::given: return identity_order(p.size());
    }
    return identity_order(p.size());
}

// Predicted order expressed as indices into p.tokens.
template <typename T>
order_prediction predict(const layout_reader<T>& model, const page& p, input_order order, std::uint64_t seed,
                         const decode_options& opt) {
    const auto src = source_order(p, order, seed);
    const auto out = decode(model, reorder(p.tokens, src), p.width, p.height, opt);
    order_prediction pred{p.id, {}};
    pred.indices.reserve(out.size());
    for (int i : out) pred.indices.push_back(src[std::size_t(i)]);
    return pred;
}

} // namespace readorder::model
