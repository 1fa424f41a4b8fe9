#pragma once

// The `readorder` command line. Kept in a header so tests can drive it
// in-process through run().

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "readorder/adaptation.hpp"
#include "readorder/colorkey.hpp"
#include "readorder/heuristic.hpp"
#include "readorder/io.hpp"
#include "readorder/metrics.hpp"
#include "readorder/model.hpp"
#include "readorder/parallel.hpp"
#include "readorder/render.hpp"
#include "readorder/synthgen.hpp"

namespace readorder::cli {

inline json error_json(error_kind kind, const std::string& message) {
    const char* name = kind == error_kind::usage ? "usage" : kind == error_kind::data ? "data" : "numeric";
    json j = json::object();
    j["error"] = json::object();
    j["error"]["code"] = int(kind);
    j["error"]["kind"] = name;
    j["error"]["message"] = message;
    return j;
}

inline json to_json(const eval_report& r) {
    json j = json::object();
    j["pages"] = r.per_page.size();
    j["avg_bleu"] = r.avg_bleu;
    j["avg_ard"] = r.avg_ard;
    json pages = json::array();
    for (const auto& s : r.per_page) {
        json p = json::object();
        p["id"] = s.page_id;
        p["bleu"] = s.bleu;
        p["ard"] = s.ard;
        pages.push_back(std::move(p));
    }
    j["per_page"] = std::move(pages);
    return j;
}

inline json to_json(const dataset_stats_report& r) {
    static const char* labels[] = {"[0.00, 0.25]", "(0.25, 0.50]", "(0.50, 0.75]", "(0.75, 1.00]"};
    json j = json::object();
    j["pages"] = r.pages;
    j["avg_words"] = r.avg_words;
    j["avg_bleu"] = r.avg_bleu;
    json hist = json::array();
    for (std::size_t b = 0; b < r.histogram.size(); ++b) {
        json h = json::object();
        h["range"] = labels[b];
        h["count"] = r.histogram[b];
        h["fraction"] = double(r.histogram[b]) / double(r.pages);
        hist.push_back(std::move(h));
    }
    j["histogram"] = std::move(hist);
    return j;
}

namespace detail {

inline void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw data_error("cannot write '" + path + "'");
    f << text;
    if (!f) throw data_error("write failed for '" + path + "'");
}

inline std::string jsonl_text(const std::vector<json>& lines) {
    std::ostringstream s;
    write_jsonl(s, lines);
    return s.str();
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw data_error(path + ": " + e.what());
    }
}

// Value precedence: explicit flag, then config file key, then default.
template <typename V>
void layer(V& target, const CLI::Option* flag, const V& flag_value, const json& config, const char* key) {
    if (flag && flag->count() > 0) {
        target = flag_value;
        return;
    }
    if (config.contains(key)) {
        try {
            target = config[key].get<V>();
        } catch (const json::exception& e) {
            throw usage_error(std::string("config key '") + key + "': " + e.what());
        }
    }
}

} // namespace detail

struct gen_args {
    std::string kind = "mixed", out, lines_out, seq_out, layout_out;
    std::size_t count = 100;
    std::uint64_t seed = 0;
    int tokens_min = 50, tokens_max = 60, jobs = 1;
    int page_width = 1000, page_height = 1414, font_height = 36, column_gap = 40;
};

struct train_args {
    std::string data, out, config, mode = "full", report;
    double shuffle_rate = 0.0, lr = 1e-3, dropout = 0.0, weight_decay = 0.01, ema_decay = 0.0;
    int epochs = 20, warmup = 500, batch_size = 8, layers = 2, hidden = 128, heads = 4, ffn = 512;
    int max_tokens = 128, coord_grid = 1000, vocab_size = 4096;
    long max_steps = 0;
    std::uint64_t seed = 0;
};

struct predict_args {
    std::string data, out, method = "heuristic", model, input_order = "heuristic";
    int beam = 1, jobs = 1;
    bool unconstrained = false;
    std::uint64_t seed = 0;
};

inline int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Reading order detection toolkit", "readorder"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    gen_args g;
    auto* gen = app.add_subcommand("gen", "Generate synthetic pages with gold reading order");
    gen->add_option("--kind", g.kind, "single_column|two_column|three_column|table|mixed");
    gen->add_option("--count", g.count, "Number of pages");
    gen->add_option("--seed", g.seed, "Random seed");
    gen->add_option("-o,--out", g.out, "Pages JSONL")->required();
    gen->add_option("--lines-out", g.lines_out, "Line boxes JSONL");
    gen->add_option("--seq-out", g.seq_out, "Reading-sequence records JSONL");
    gen->add_option("--layout-out", g.layout_out, "Color-keyed layout records JSONL");
    gen->add_option("--tokens-min", g.tokens_min);
    gen->add_option("--tokens-max", g.tokens_max);
    gen->add_option("--page-width", g.page_width);
    gen->add_option("--page-height", g.page_height);
    gen->add_option("--font-height", g.font_height);
    gen->add_option("--column-gap", g.column_gap);
    gen->add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);

    std::string stats_data, stats_out;
    auto* stats = app.add_subcommand("stats", "Corpus statistics of the heuristic order");
    stats->add_option("--data", stats_data, "Pages JSONL")->required();
    stats->add_option("-o,--out", stats_out, "Output JSON (default stdout)");

    std::string seq_path, layout_path, align_out;
    auto* align = app.add_subcommand("align", "Match reading-sequence records to color-keyed layout records");
    align->add_option("--seq", seq_path)->required();
    align->add_option("--layout", layout_path)->required();
    align->add_option("-o,--out", align_out, "Pages JSONL")->required();

    train_args t;
    auto* train = app.add_subcommand("train", "Train the pointer model");
    train->add_option("--data", t.data, "Training pages JSONL")->required();
    train->add_option("-o,--out", t.out, "Checkpoint path")->required();
    train->add_option("--config", t.config, "JSON file with defaults for any of these flags");
    train->add_option("--report", t.report, "Write the training report JSON here");
    const CLI::Option* o_mode = train->add_option("--mode", t.mode, "full|text_only|layout_only");
    const CLI::Option* o_shuffle = train->add_option("--shuffle-rate", t.shuffle_rate);
    const CLI::Option* o_epochs = train->add_option("--epochs", t.epochs);
    const CLI::Option* o_lr = train->add_option("--lr", t.lr);
    const CLI::Option* o_warmup = train->add_option("--warmup", t.warmup);
    const CLI::Option* o_batch = train->add_option("--batch-size", t.batch_size);
    const CLI::Option* o_seed = train->add_option("--seed", t.seed);
    const CLI::Option* o_layers = train->add_option("--layers", t.layers);
    const CLI::Option* o_hidden = train->add_option("--hidden", t.hidden);
    const CLI::Option* o_heads = train->add_option("--heads", t.heads);
    const CLI::Option* o_ffn = train->add_option("--ffn", t.ffn);
    const CLI::Option* o_maxtok = train->add_option("--max-tokens", t.max_tokens);
    const CLI::Option* o_grid = train->add_option("--coord-grid", t.coord_grid);
    const CLI::Option* o_vocab = train->add_option("--vocab-size", t.vocab_size);
    const CLI::Option* o_dropout = train->add_option("--dropout", t.dropout);
    const CLI::Option* o_wd = train->add_option("--weight-decay", t.weight_decay);
    const CLI::Option* o_maxsteps = train->add_option("--max-steps", t.max_steps);
    const CLI::Option* o_ema = train->add_option("--ema-decay", t.ema_decay, "Keep a moving average of the weights (0: off)");

    predict_args pr;
    auto* predict = app.add_subcommand("predict", "Predict reading order");
    predict->add_option("--data", pr.data, "Pages JSONL")->required();
    predict->add_option("-o,--out", pr.out, "Predictions JSONL (default stdout)");
    predict->add_option("--method", pr.method, "heuristic|model");
    predict->add_option("--model", pr.model, "Checkpoint (for --method model)");
    predict->add_option("--beam", pr.beam)->check(CLI::PositiveNumber);
    predict->add_flag("--unconstrained", pr.unconstrained, "Allow repeated indices");
    predict->add_option("--input-order", pr.input_order, "heuristic|shuffled|given");
    predict->add_option("--seed", pr.seed, "Seed for shuffled input order");
    predict->add_option("--jobs", pr.jobs)->check(CLI::PositiveNumber);

    std::string eval_pred, eval_gold, eval_out;
    int eval_jobs = 1;
    auto* eval = app.add_subcommand("eval", "Score predictions (page-level BLEU, ARD)");
    eval->add_option("--pred", eval_pred)->required();
    eval->add_option("--gold", eval_gold)->required();
    eval->add_option("-o,--out", eval_out, "Report JSON (default stdout)");
    eval->add_option("--jobs", eval_jobs)->check(CLI::PositiveNumber);

    std::string ad_tokens, ad_lines, ad_order, ad_out;
    auto* adapt = app.add_subcommand("adapt-lines", "Order text lines from a token order");
    adapt->add_option("--tokens", ad_tokens, "Pages JSONL")->required();
    adapt->add_option("--lines", ad_lines, "Line boxes JSONL")->required();
    adapt->add_option("--order", ad_order, "Token order predictions JSONL")->required();
    adapt->add_option("-o,--out", ad_out, "Line order JSONL (default stdout)");

    std::string rd_data, rd_pred, rd_id, rd_out;
    auto* render = app.add_subcommand("render", "Draw a page as SVG");
    render->add_option("--data", rd_data, "Pages JSONL")->required();
    render->add_option("--pred", rd_pred, "Predictions JSONL (omit for gold order)");
    render->add_option("--id", rd_id, "Page id (default: first page)");
    render->add_option("-o,--out", rd_out, "SVG path (default stdout)");

    try {
        std::vector<std::string> args(argv.rbegin(), argv.rend());
        try {
            app.parse(args);
        } catch (const CLI::CallForHelp&) {
            out << app.help();
            return 0;
        } catch (const CLI::CallForAllHelp&) {
            out << app.help("", CLI::AppFormatMode::All);
            return 0;
        } catch (const CLI::ParseError& e) {
            throw usage_error(e.what());
        }

        if (gen->parsed()) {
            synthgen::gen_spec spec;
            spec.kind = synthgen::parse_layout_kind(g.kind);
            spec.seed = g.seed;
            spec.tokens_min = g.tokens_min;
            spec.tokens_max = g.tokens_max;
            spec.page_width = g.page_width;
            spec.page_height = g.page_height;
            spec.font_height = g.font_height;
            spec.column_gap = g.column_gap;
            const auto pages = synthgen::generate(spec, g.count, g.jobs);
            std::vector<json> page_lines, line_lines, seq_lines, layout_lines;
            for (const auto& gp : pages) {
                page_lines.push_back(to_json(gp.page));
                for (const auto& l : gp.lines) line_lines.push_back(to_json(l));
                for (const auto& s : colorkey::sequence_records(gp.page)) seq_lines.push_back(colorkey::to_json(s));
                // Layout records arrive in physical (top-down, left-right) order.
                for (const auto& l : colorkey::layout_records(gp.page, heuristic_order(gp.page.tokens)))
                    layout_lines.push_back(colorkey::to_json(l));
            }
            write_jsonl_file(g.out, page_lines);
            if (!g.lines_out.empty()) write_jsonl_file(g.lines_out, line_lines);
            if (!g.seq_out.empty()) write_jsonl_file(g.seq_out, seq_lines);
            if (!g.layout_out.empty()) write_jsonl_file(g.layout_out, layout_lines);
        } else if (stats->parsed()) {
            detail::write_text(stats_out, to_json(dataset_stats(read_pages(stats_data))).dump(2) + "\n", out);
        } else if (align->parsed()) {
            const auto seq = parse_all<colorkey::sequence_record>(read_jsonl_file(seq_path),
                                                                  colorkey::sequence_record_from_json, seq_path);
            const auto lay = parse_all<colorkey::layout_record>(read_jsonl_file(layout_path),
                                                                colorkey::layout_record_from_json, layout_path);
            write_jsonl_file(align_out, to_json_lines(colorkey::align_pages(seq, lay)));
        } else if (train->parsed()) {
            const json cfg = t.config.empty() ? json::object() : detail::read_json_file(t.config);
            if (!cfg.is_object()) throw usage_error("config file must hold a JSON object");
            detail::layer(t.mode, o_mode, t.mode, cfg, "mode");
            detail::layer(t.shuffle_rate, o_shuffle, t.shuffle_rate, cfg, "shuffle_rate");
            detail::layer(t.epochs, o_epochs, t.epochs, cfg, "epochs");
            detail::layer(t.lr, o_lr, t.lr, cfg, "lr");
            detail::layer(t.warmup, o_warmup, t.warmup, cfg, "warmup");
            detail::layer(t.batch_size, o_batch, t.batch_size, cfg, "batch_size");
            detail::layer(t.seed, o_seed, t.seed, cfg, "seed");
            detail::layer(t.layers, o_layers, t.layers, cfg, "layers");
            detail::layer(t.hidden, o_hidden, t.hidden, cfg, "hidden_dim");
            detail::layer(t.heads, o_heads, t.heads, cfg, "heads");
            detail::layer(t.ffn, o_ffn, t.ffn, cfg, "ffn_dim");
            detail::layer(t.max_tokens, o_maxtok, t.max_tokens, cfg, "max_tokens_per_page");
            detail::layer(t.coord_grid, o_grid, t.coord_grid, cfg, "coord_grid");
            detail::layer(t.vocab_size, o_vocab, t.vocab_size, cfg, "vocab_size");
            detail::layer(t.dropout, o_dropout, t.dropout, cfg, "dropout");
            detail::layer(t.weight_decay, o_wd, t.weight_decay, cfg, "weight_decay");
            detail::layer(t.max_steps, o_maxsteps, t.max_steps, cfg, "max_steps");
            detail::layer(t.ema_decay, o_ema, t.ema_decay, cfg, "ema_decay");

            model::model_config mc;
            mc.layers = t.layers;
            mc.hidden_dim = t.hidden;
            mc.heads = t.heads;
            mc.ffn_dim = t.ffn;
            mc.max_tokens_per_page = t.max_tokens;
            mc.coord_grid = t.coord_grid;
            mc.mode = model::parse_input_mode(t.mode);
            mc.vocab_size = t.vocab_size;
            mc.dropout = t.dropout;
            mc.seed = t.seed;
            model::train_options opt;
            opt.epochs = t.epochs;
            opt.lr = t.lr;
            opt.warmup = t.warmup;
            opt.batch_size = t.batch_size;
            opt.shuffle_rate = t.shuffle_rate;
            opt.weight_decay = t.weight_decay;
            opt.seed = t.seed;
            opt.max_steps = t.max_steps;
            opt.ema_decay = t.ema_decay;

            const auto pages = read_pages(t.data);
            model::layout_reader<float> m(mc);
            const auto rep = model::train(m, pages, opt, [&](const model::train_progress& p) {
                err << "epoch " << p.epoch + 1 << "/" << opt.epochs << " steps " << p.steps << " loss " << p.epoch_loss << '\n';
            });
            json meta = json::object();
            meta["epochs"] = opt.epochs;
            meta["lr"] = opt.lr;
            meta["warmup"] = opt.warmup;
            meta["batch_size"] = opt.batch_size;
            meta["shuffle_rate"] = opt.shuffle_rate;
            meta["ema_decay"] = opt.ema_decay;
            meta["steps"] = rep.steps;
            meta["final_loss"] = rep.final_loss;
            meta["epoch_loss"] = rep.epoch_loss;
            model::save_model(t.out, m, meta);
            if (!t.report.empty()) detail::write_text(t.report, meta.dump(2) + "\n", out);
        } else if (predict->parsed()) {
            const auto pages = read_pages(pr.data);
            std::vector<order_prediction> preds(pages.size());
            if (pr.method == "heuristic") {
                parallel_for(pages.size(), pr.jobs, [&](std::size_t i) {
                    preds[i] = {pages[i].id, heuristic_order(pages[i].tokens)};
                });
            } else if (pr.method == "model") {
                if (pr.model.empty()) throw usage_error("predict: --method model needs --model");
                const auto m = model::load_model(pr.model);
                const auto order = model::parse_input_order(pr.input_order);
                const model::decode_options opt{!pr.unconstrained, pr.beam};
                parallel_for(pages.size(), pr.jobs, [&](std::size_t i) {
                    preds[i] = model::predict(m, pages[i], order, pr.seed, opt);
                });
            } else {
                throw usage_error("predict: unknown method '" + pr.method + "'");
            }
            detail::write_text(pr.out, detail::jsonl_text(to_json_lines(preds)), out);
        } else if (eval->parsed()) {
            const auto gold = read_pages(eval_gold);
            const auto preds = read_predictions(eval_pred);
            detail::write_text(eval_out, to_json(evaluate(gold, preds)).dump(2) + "\n", out);
        } else if (adapt->parsed()) {
            const auto pages = read_pages(ad_tokens);
            const auto lines = parse_all<line_box>(read_jsonl_file(ad_lines), line_box_from_json, ad_lines);
            const auto orders = read_predictions(ad_order);
            std::unordered_map<std::string, std::vector<line_box>> lines_by_page;
            for (const auto& l : lines) lines_by_page[l.page_id].push_back(l);
            std::unordered_map<std::string, const order_prediction*> order_by_page;
            for (const auto& o : orders) order_by_page[o.page_id] = &o;
            std::vector<json> result;
            for (const auto& p : pages) {
                auto li = lines_by_page.find(p.id);
                if (li == lines_by_page.end()) throw data_error("adapt-lines: no lines for page '" + p.id + "'");
                auto oi = order_by_page.find(p.id);
                if (oi == order_by_page.end()) throw data_error("adapt-lines: no token order for page '" + p.id + "'");
                result.push_back(to_json(adapt_lines(p, li->second, oi->second->indices)));
            }
            detail::write_text(ad_out, detail::jsonl_text(result), out);
        } else if (render->parsed()) {
            const auto pages = read_pages(rd_data);
            const page* target = nullptr;
            for (const auto& p : pages)
                if (rd_id.empty() || p.id == rd_id) {
                    target = &p;
                    break;
                }
            if (!target) throw data_error("render: no page '" + rd_id + "'");
            std::optional<order_prediction> pred;
            if (!rd_pred.empty()) {
                for (const auto& o : read_predictions(rd_pred))
                    if (o.page_id == target->id) pred = o;
                if (!pred) throw data_error("render: no prediction for page '" + target->id + "'");
            }
            detail::write_text(rd_out, render_svg(*target, pred), out);
        }
        return 0;
    } catch (const error& e) {
        err << error_json(e.kind(), e.what()).dump() << '\n';
        return int(e.kind());
    } catch (const std::exception& e) {
        err << error_json(error_kind::data, e.what()).dump() << '\n';
        return int(error_kind::data);
    }
}

} // namespace readorder::cli
