// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles/oracles.hpp"
#include "readorder/adaptation.hpp"
#include "readorder/colorkey.hpp"
#include "readorder/heuristic.hpp"
#include "readorder/io.hpp"
#include "readorder/metrics.hpp"
#include "readorder/model.hpp"
#include "readorder/synthgen.hpp"

using namespace readorder;
using clock_type = std::chrono::steady_clock;

namespace {

int failures = 0;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

void report(int id, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---- 1: metric oracles -----------------------------------------------------

void metric_oracles() {
    const auto t0 = clock_type::now();
    rng r(101);
    double worst_bleu = 0.0;
    int nonzero = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto n = std::size_t(r.uniform_int(1, 200));
        const auto ref = r.permutation(n);
        std::vector<int> hyp;
        switch (t % 4) {
        case 0: hyp = ref; break;
        case 1: hyp = r.permutation(n); break;
        default: {
            // Mostly-correct orders: local swaps, a dropped span, stray repeats.
            hyp = ref;
            for (int e = int(r.uniform_int(0, 6)); e > 0 && hyp.size() > 1; --e) {
                const auto i = std::size_t(r.uniform_int(0, std::int64_t(hyp.size()) - 2));
                std::swap(hyp[i], hyp[i + 1]);
            }
            if (r.bernoulli(0.5) && hyp.size() > 2) {
                const auto a = std::size_t(r.uniform_int(0, std::int64_t(hyp.size()) - 1));
                hyp.erase(hyp.begin() + std::ptrdiff_t(a), hyp.begin() + std::ptrdiff_t(std::min(hyp.size(), a + 3)));
            }
            for (int e = int(r.uniform_int(0, 2)); e > 0; --e)
                hyp.insert(hyp.begin() + std::ptrdiff_t(r.uniform_int(0, std::int64_t(hyp.size()))),
                           int(r.uniform_int(0, std::int64_t(n) - 1)));
        }
        }
        const double a = page_bleu(hyp, ref), b = oracle::bleu(hyp, ref);
        worst_bleu = std::max(worst_bleu, std::abs(a - b));
        nonzero += a > 0.0;
    }
    int ard_mismatch = 0, with_omissions = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto n = std::size_t(r.uniform_int(1, 200));
        const auto ref = r.permutation(n);
        auto hyp = ref;
        if (t % 2) r.shuffle(hyp);
        else
            for (int e = int(r.uniform_int(0, 10)); e > 0 && hyp.size() > 1; --e) {
                const auto i = std::size_t(r.uniform_int(0, std::int64_t(hyp.size()) - 2));
                std::swap(hyp[i], hyp[i + 1]);
            }
        if (r.bernoulli(0.5)) {
            for (int e = int(r.uniform_int(1, std::int64_t(n))); e > 0 && !hyp.empty(); --e)
                hyp.erase(hyp.begin() + std::ptrdiff_t(r.uniform_int(0, std::int64_t(hyp.size()) - 1)));
        }
        with_omissions += hyp.size() < n;
        ard_mismatch += ard(ref, hyp) != oracle::ard(ref, hyp);
    }
    const double sec = seconds_since(t0);
    report(1, worst_bleu <= 1e-9 && ard_mismatch == 0 && sec < 10.0,
           fmt("metric oracles: max |BLEU - naive| = %.2e over 1000 pairs (%d non-zero); ARD exact mismatches %d/1000 "
               "(%d with omissions); %.2f s",
               worst_bleu, nonzero, ard_mismatch, with_omissions, sec));
}

// ---- 2: coloring and alignment ---------------------------------------------

void coloring() {
    rng r(202);
    int bad_roundtrip = 0;
    for (int t = 0; t < 10000; ++t) {
        const auto i = std::uint32_t(r.uniform_int(0, colorkey::color_space_size - 1));
        bad_roundtrip += colorkey::decode_color(colorkey::encode_index(i)) != i;
    }
    synthgen::gen_spec spec;
    spec.seed = 202;
    const auto pages = synthgen::generate(spec, 500);
    std::vector<colorkey::sequence_record> seq;
    std::vector<colorkey::layout_record> layout;
    for (const auto& g : pages) {
        for (auto& s : colorkey::sequence_records(g.page)) seq.push_back(std::move(s));
        for (auto& l : colorkey::layout_records(g.page, r.permutation(g.page.size()))) layout.push_back(std::move(l));
    }
    r.shuffle(layout);
    const auto aligned = colorkey::align_pages(seq, layout);
    std::size_t mismatches = 0, tokens = 0;
    for (std::size_t p = 0; p < pages.size(); ++p) {
        const auto& gold = pages[p].page.tokens;
        tokens += gold.size();
        if (p >= aligned.size() || aligned[p].tokens.size() != gold.size()) {
            mismatches += gold.size();
            continue;
        }
        for (std::size_t k = 0; k < gold.size(); ++k) mismatches += !(aligned[p].tokens[k] == gold[k]);
    }
    report(2, bad_roundtrip == 0 && mismatches == 0,
           fmt("coloring: %d/10000 round-trip failures; align on 500 shuffled pages (%zu tokens): %zu mismatches",
               bad_roundtrip, tokens, mismatches));
}

// ---- 3: mask contract --------------------------------------------------------

void mask_contract() {
    rng r(303);
    long violations = 0, cells = 0;
    for (int t = 0; t < 100; ++t) {
        const int ns = int(r.uniform_int(1, 64)), nt = int(r.uniform_int(0, 64));
        const auto m = model::build_mask(ns, nt);
        const int L = ns + nt;
        if (m.size() != L) {
            ++violations;
            continue;
        }
        for (int i = 0; i < L; ++i)
            for (int j = 0; j < L; ++j) {
                ++cells;
                const bool src_i = i < ns, src_j = j < ns;
                bool expected;
                if (src_i && src_j) expected = true;         // source block full
                else if (!src_i && src_j) expected = true;   // target sees all sources
                else if (src_i && !src_j) expected = false;  // sources never see targets
                else expected = j <= i;                      // causal among targets
                violations += m.allowed(i, j) != expected;
            }
    }
    report(3, violations == 0, fmt("mask contract: %ld violations over %ld cells in 100 random masks", violations, cells));
}

// ---- 4: gradient check ------------------------------------------------------

void gradient_check() {
    synthgen::gen_spec s;
    s.tokens_min = s.tokens_max = 6;
    s.seed = 404;
    const auto p = synthgen::generate_page(s, 0).page;
    model::model_config c;
    c.layers = 2;
    c.hidden_dim = 16;
    c.heads = 2;
    c.ffn_dim = 32;
    c.vocab_size = 97;
    c.coord_grid = 100;
    c.max_tokens_per_page = 8;
    c.seed = 4;
    model::layout_reader<double> m(c);
    rng r(4);
    const auto packed = model::pack_training(p, model::make_training_view(p, true, r), c);
    model::flat_vector<double> grad;
    m.loss_and_grad(packed, grad, 1.0);
    auto& w = m.parameters();
    const double h = 1e-5;
    double worst = 0.0;
    std::size_t active = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double o = w[i];
        w[i] = o + h;
        const double lp = m.loss(packed);
        w[i] = o - h;
        const double lm = m.loss(packed);
        w[i] = o;
        const double num = (lp - lm) / (2 * h);
        active += grad[i] != 0.0;
        // Relative error with a small floor so exactly-zero gradients compare cleanly.
        const double rel = std::abs(num - grad[i]) / std::max({std::abs(num), std::abs(grad[i]), 1e-6});
        worst = std::max(worst, rel);
    }
    report(4, worst < 1e-3,
           fmt("gradient check: %zu parameters (%zu with non-zero gradient), max relative error %.2e", w.size(), active,
               worst));
}

// ---- 5: overfit sanity ------------------------------------------------------

void overfit() {
    const auto t0 = clock_type::now();
    synthgen::gen_spec s;
    s.tokens_min = s.tokens_max = 20;
    s.kind = synthgen::layout_kind::two_column;
    s.seed = 505;
    const auto p = synthgen::generate_page(s, 0).page;
    model::model_config c;
    c.seed = 5;
    model::layout_reader<float> m(c);
    model::train_options o;
    o.epochs = 500;
    o.max_steps = 500;
    o.batch_size = 1;
    o.warmup = 20;
    o.lr = 3e-3;
    o.seed = 5;
    const auto rep = model::train(m, {p}, o);
    const double loss = model::mean_loss(m, {p});
    const auto pred = model::predict(m, p, model::input_order::heuristic, 0, {});
    const bool exact = pred.indices == identity_order(p.size());
    const double sec = seconds_since(t0);
    report(5, loss < 0.01 && exact && rep.steps <= 500 && sec < 120.0,
           fmt("overfit: %ld steps on one 20-token page, loss %.2e, greedy decode %s gold; %.1f s", rep.steps, loss,
               exact ? "reproduces" : "differs from", sec));
}

// ---- 6, 7, 10: reading-order experiments --------------------------------------

struct experiment_setup {
    std::vector<page> train, test;
    std::vector<synthgen::layout_kind> test_kinds;
};

experiment_setup make_setup() {
    synthgen::gen_spec train_spec;
    train_spec.seed = 6001;
    synthgen::gen_spec test_spec;
    test_spec.seed = 6002;
    experiment_setup e;
    for (auto& g : synthgen::generate(train_spec, 2000)) e.train.push_back(std::move(g.page));
    for (auto& g : synthgen::generate(test_spec, 200)) {
        e.test.push_back(std::move(g.page));
        e.test_kinds.push_back(g.kind);
    }
    return e;
}

model::train_options experiment_options(double shuffle_rate) {
    model::train_options o;
    o.epochs = 36;
    o.lr = 1.5e-3;
    o.ema_decay = 0.999;
    o.warmup = 300;
    o.batch_size = 8;
    o.shuffle_rate = shuffle_rate;
    o.seed = 66;
    return o;
}

model::layout_reader<float> train_model(const experiment_setup& e, model::input_mode mode, double shuffle_rate) {
    model::model_config c;
    c.mode = mode;
    c.coord_grid = 200;
    c.seed = 66;
    model::layout_reader<float> m(c);
    model::train(m, e.train, experiment_options(shuffle_rate));
    return m;
}

eval_report evaluate_model(const model::layout_reader<float>& m, const std::vector<page>& pages,
                           model::input_order order) {
    std::vector<order_prediction> preds;
    preds.reserve(pages.size());
    for (const auto& p : pages) preds.push_back(model::predict(m, p, order, 77, {}));
    return evaluate(pages, preds);
}

std::string report_json(const eval_report& r) {
    json j = json::object();
    j["avg_bleu"] = r.avg_bleu;
    j["avg_ard"] = r.avg_ard;
    json pages = json::array();
    for (const auto& s : r.per_page) pages.push_back(json::array({s.page_id, s.bleu, s.ard}));
    j["per_page"] = std::move(pages);
    return j.dump();
}

struct experiment_result {
    eval_report full, layout_only, text_only;
    double heuristic_two_column = 0.0;
    std::size_t two_column_pages = 0;
    double seconds = 0.0;
    std::string fingerprint;
};

experiment_result run_experiment(const experiment_setup& e, std::optional<model::layout_reader<float>>* keep_full,
                                 std::optional<model::layout_reader<float>>* keep_layout,
                                 std::optional<model::layout_reader<float>>* keep_text) {
    const auto t0 = clock_type::now();
    experiment_result r;
    auto full = train_model(e, model::input_mode::full, 0.0);
    r.full = evaluate_model(full, e.test, model::input_order::heuristic);
    auto lo = train_model(e, model::input_mode::layout_only, 0.0);
    r.layout_only = evaluate_model(lo, e.test, model::input_order::heuristic);
    auto to = train_model(e, model::input_mode::text_only, 0.0);
    r.text_only = evaluate_model(to, e.test, model::input_order::heuristic);

    double sum = 0.0;
    for (std::size_t i = 0; i < e.test.size(); ++i)
        if (e.test_kinds[i] == synthgen::layout_kind::two_column) {
            sum += page_bleu(heuristic_order(e.test[i].tokens), identity_order(e.test[i].size()));
            ++r.two_column_pages;
        }
    r.heuristic_two_column = r.two_column_pages ? sum / double(r.two_column_pages) : 1.0;
    r.seconds = seconds_since(t0);
    r.fingerprint = report_json(r.full) + report_json(r.layout_only) + report_json(r.text_only);
    if (keep_full) keep_full->emplace(std::move(full));
    if (keep_layout) keep_layout->emplace(std::move(lo));
    if (keep_text) keep_text->emplace(std::move(to));
    return r;
}

void report_experiment(const experiment_result& r) {
    const bool full_ok = r.full.avg_bleu >= 0.95 && r.full.avg_ard <= 1.0;
    const bool heur_ok = r.heuristic_two_column <= 0.60;
    const bool layout_ok = std::abs(r.layout_only.avg_bleu - r.full.avg_bleu) <= 0.05;
    const bool text_ok = r.text_only.avg_bleu <= r.layout_only.avg_bleu - 0.10;
    const bool time_ok = r.seconds <= 1800.0;
    report(6, full_ok && heur_ok && layout_ok && text_ok && time_ok,
           fmt("desk-scale experiment: full BLEU %.4f ARD %.3f; layout_only BLEU %.4f; text_only BLEU %.4f; "
               "heuristic on %zu two-column pages BLEU %.4f; %.0f s",
               r.full.avg_bleu, r.full.avg_ard, r.layout_only.avg_bleu, r.text_only.avg_bleu, r.two_column_pages,
               r.heuristic_two_column, r.seconds));
}

void input_order_study(const experiment_setup& e, const model::layout_reader<float>& r0_model) {
    const auto t0 = clock_type::now();
    const auto r1_model = train_model(e, model::input_mode::full, 1.0);
    const auto r1 = evaluate_model(r1_model, e.test, model::input_order::shuffled);
    const auto r0 = evaluate_model(r0_model, e.test, model::input_order::shuffled);
    report(7, r1.avg_bleu >= 0.85 && r0.avg_bleu <= r1.avg_bleu - 0.30,
           fmt("input-order study on shuffled inputs: r=100%% BLEU %.4f ARD %.3f; r=0%% BLEU %.4f ARD %.3f; %.0f s",
               r1.avg_bleu, r1.avg_ard, r0.avg_bleu, r0.avg_ard, seconds_since(t0)));
}

// ---- 8: line adaptation ---------------------------------------------------------

void line_adaptation() {
    synthgen::gen_spec spec;
    spec.seed = 808;
    const auto pages = synthgen::generate(spec, 500);
    int exact = 0;
    double bleu = 0.0, ard_sum = 0.0;
    for (const auto& g : pages) {
        const auto order = order_lines(assign_tokens(g.page.tokens, g.lines), identity_order(g.page.size()));
        const auto gold = identity_order(g.lines.size());
        exact += order == gold;
        bleu += page_bleu(order, gold);
        ard_sum += ard(gold, order);
    }
    bleu /= double(pages.size());
    ard_sum /= double(pages.size());
    report(8, exact == 500 && bleu == 1.0 && ard_sum == 0.0,
           fmt("line adaptation: %d/500 pages exact, BLEU %.6f, ARD %.6f", exact, bleu, ard_sum));
}

// ---- 9: ablation invariance ------------------------------------------------------

void ablation_invariance(const model::layout_reader<float>& layout_only, const model::layout_reader<float>& text_only) {
    synthgen::gen_spec spec;
    spec.seed = 909;
    const auto pages = synthgen::generate(spec, 50);
    rng r(909);
    int lo_ok = 0, to_ok = 0;
    for (const auto& g : pages) {
        const auto& p = g.page;
        const auto src = heuristic_order(p.tokens);
        const auto tokens = reorder(p.tokens, src);
        std::vector<int> targets(p.size());
        for (std::size_t i = 0; i < src.size(); ++i) targets[std::size_t(src[i])] = int(i);
        auto logits = [&](const model::layout_reader<float>& m, const std::vector<token>& t) {
            return m.pointer_logits(model::pack(t, p.width, p.height, targets, m.config()));
        };
        auto permuted_words = tokens;
        const auto perm = r.permutation(tokens.size());
        for (std::size_t i = 0; i < tokens.size(); ++i) permuted_words[i].word = tokens[std::size_t(perm[i])].word;
        lo_ok += (logits(layout_only, tokens).array() == logits(layout_only, permuted_words).array()).all();

        auto moved = tokens;
        for (auto& t : moved) {
            const auto x0 = std::int32_t(r.uniform_int(0, p.width - 1)), y0 = std::int32_t(r.uniform_int(0, p.height - 1));
            t.box = {x0, y0, std::int32_t(r.uniform_int(x0, p.width)), std::int32_t(r.uniform_int(y0, p.height))};
        }
        to_ok += (logits(text_only, tokens).array() == logits(text_only, moved).array()).all();
    }
    report(9, lo_ok == 50 && to_ok == 50,
           fmt("ablation invariance (trained models): layout_only under word permutation %d/50 bit-exact; "
               "text_only under bbox perturbation %d/50 bit-exact",
               lo_ok, to_ok));
}

} // namespace

int main() {
    const auto t0 = clock_type::now();
    try {
        metric_oracles();
        coloring();
        mask_contract();
        gradient_check();
        overfit();

        const auto setup = make_setup();
        std::optional<model::layout_reader<float>> full, layout_only, text_only;
        const auto first = run_experiment(setup, &full, &layout_only, &text_only);
        report_experiment(first);
        input_order_study(setup, *full);
        line_adaptation();
        ablation_invariance(*layout_only, *text_only);

        const auto second = run_experiment(setup, nullptr, nullptr, nullptr);
        report(10, second.fingerprint == first.fingerprint,
               fmt("determinism: repeated experiment run %s (full BLEU %.6f vs %.6f, %zu-byte reports)",
                   second.fingerprint == first.fingerprint ? "identical" : "differs", first.full.avg_bleu,
                   second.full.avg_bleu, first.fingerprint.size()));
    } catch (const std::exception& e) {
        std::printf("acceptance aborted: %s\n", e.what());
        return 2;
    }
    std::printf("%d criteria failed; total %.0f s\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
