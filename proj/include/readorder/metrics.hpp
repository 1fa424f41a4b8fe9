#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "readorder/core.hpp"
#include "readorder/heuristic.hpp"

namespace readorder {

inline constexpr int bleu_max_order = 4;

// Sentence BLEU-4 over index sequences: clipped n-gram precisions, geometric
// mean, brevity penalty, no smoothing. Orders above |reference| are dropped.
inline double page_bleu(const std::vector<int>& hypothesis, const std::vector<int>& reference) {
    if (reference.empty()) throw data_error("page_bleu: empty reference");
    if (hypothesis.empty()) return 0.0;
    const int max_n = std::min<int>(bleu_max_order, int(reference.size()));

    double log_sum = 0.0;
    for (int n = 1; n <= max_n; ++n) {
        if (int(hypothesis.size()) < n) return 0.0;
        std::map<std::vector<int>, int> ref_counts;
        for (std::size_t i = 0; i + n <= reference.size(); ++i)
            ++ref_counts[std::vector<int>(reference.begin() + i, reference.begin() + i + n)];
        std::map<std::vector<int>, int> hyp_counts;
        for (std::size_t i = 0; i + n <= hypothesis.size(); ++i)
            ++hyp_counts[std::vector<int>(hypothesis.begin() + i, hypothesis.begin() + i + n)];
        long matched = 0;
        for (const auto& [gram, c] : hyp_counts) {
            auto it = ref_counts.find(gram);
            if (it != ref_counts.end()) matched += std::min(c, it->second);
        }
        if (matched == 0) return 0.0;
        const long total = long(hypothesis.size()) - n + 1;
        log_sum += std::log(double(matched) / double(total));
    }
    const double ratio = double(reference.size()) / double(hypothesis.size());
    const double bp = ratio > 1.0 ? std::exp(1.0 - ratio) : 1.0;
    return bp * std::exp(log_sum / max_n);
}

// Average relative distance. Elements of `reference` missing from
// `hypothesis` cost n each; positions are 0-based on both sides.
inline double ard(const std::vector<int>& reference, const std::vector<int>& hypothesis) {
    const std::size_t n = reference.size();
    if (n == 0) throw data_error("ard: empty reference");
    std::unordered_map<int, long> ref_pos;
    for (std::size_t k = 0; k < n; ++k)
        if (!ref_pos.emplace(reference[k], long(k)).second)
            throw data_error("ard: duplicate element " + std::to_string(reference[k]) + " in reference");
    std::unordered_map<int, long> hyp_pos;
    for (std::size_t k = 0; k < hypothesis.size(); ++k) {
        if (!ref_pos.count(hypothesis[k]))
            throw data_error("ard: element " + std::to_string(hypothesis[k]) + " not in reference");
        if (!hyp_pos.emplace(hypothesis[k], long(k)).second)
            throw data_error("ard: duplicate element " + std::to_string(hypothesis[k]) + " in hypothesis");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        auto it = hyp_pos.find(reference[k]);
        total += it == hyp_pos.end() ? double(n) : double(std::labs(long(k) - it->second));
    }
    return total / double(n);
}

struct page_score {
    std::string page_id;
    double bleu = 0.0;
    double ard = 0.0;

    bool operator==(const page_score&) const = default;
};

struct eval_report {
    std::vector<page_score> per_page;
    double avg_bleu = 0.0;
    double avg_ard = 0.0;

    bool operator==(const eval_report&) const = default;
};

// Scores a predicted order of a page against its gold order [0, n). Repeated
// indices are collapsed to their first occurrence before scoring.
inline page_score score_prediction(const page& gold, const order_prediction& pred) {
    const std::size_t n = gold.size();
    for (int i : pred.indices)
        if (i < 0 || std::size_t(i) >= n)
            throw data_error("prediction for '" + pred.page_id + "': index " + std::to_string(i) +
                             " out of range for " + std::to_string(n) + " tokens");
    const auto hyp = deduplicate(pred.indices);
    const auto ref = identity_order(n);
    return {gold.id, page_bleu(hyp, ref), ard(ref, hyp)};
}

inline eval_report summarize(std::vector<page_score> scores) {
    eval_report r;
    r.per_page = std::move(scores);
    if (r.per_page.empty()) return r;
    for (const auto& s : r.per_page) {
        r.avg_bleu += s.bleu;
        r.avg_ard += s.ard;
    }
    r.avg_bleu /= double(r.per_page.size());
    r.avg_ard /= double(r.per_page.size());
    return r;
}

// Pairs predictions with gold pages by id; every gold page needs a prediction.
inline eval_report evaluate(const std::vector<page>& gold, const std::vector<order_prediction>& preds) {
    if (gold.empty()) throw data_error("evaluate: no gold pages");
    std::unordered_map<std::string, const order_prediction*> by_id;
    for (const auto& p : preds)
        if (!by_id.emplace(p.page_id, &p).second)
            throw data_error("evaluate: duplicate prediction for '" + p.page_id + "'");
    std::vector<page_score> scores;
    scores.reserve(gold.size());
    for (const auto& g : gold) {
        auto it = by_id.find(g.id);
        if (it == by_id.end()) throw data_error("evaluate: no prediction for page '" + g.id + "'");
        scores.push_back(score_prediction(g, *it->second));
    }
    return summarize(std::move(scores));
}

struct dataset_stats_report {
    std::size_t pages = 0;
    double avg_words = 0.0;
    double avg_bleu = 0.0;
    // Buckets [0,0.25], (0.25,0.5], (0.5,0.75], (0.75,1].
    std::array<std::size_t, 4> histogram{};

    bool operator==(const dataset_stats_report&) const = default;
};

inline int bleu_bucket(double bleu) {
    if (bleu <= 0.25) return 0;
    if (bleu <= 0.5) return 1;
    if (bleu <= 0.75) return 2;
    return 3;
}

// Word count and heuristic-order BLEU statistics of a corpus.
inline dataset_stats_report dataset_stats(const std::vector<page>& pages) {
    if (pages.empty()) throw data_error("dataset_stats: empty dataset");
    dataset_stats_report r;
    r.pages = pages.size();
    for (const auto& p : pages) {
        const double b = page_bleu(heuristic_order(p.tokens), identity_order(p.size()));
        r.avg_words += double(p.size());
        r.avg_bleu += b;
        ++r.histogram[bleu_bucket(b)];
    }
    r.avg_words /= double(pages.size());
    r.avg_bleu /= double(pages.size());
    return r;
}

} // namespace readorder
