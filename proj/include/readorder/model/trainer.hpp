#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "readorder/core.hpp"
#include "readorder/heuristic.hpp"
#include "readorder/model/network.hpp"
#include "readorder/model/optimizer.hpp"
#include "readorder/random.hpp"

namespace readorder::model {

struct train_options {
    int epochs = 20;
    double lr = 1e-3;
    int warmup = 500;
    int batch_size = 8;
    // Probability that a page's source order is randomly permuted instead of
    // the left-to-right, top-to-bottom order.
    double shuffle_rate = 0.0;
    double weight_decay = 0.01;
    double max_grad_norm = 1.0;
    std::uint64_t seed = 0;
    // Stop after this many optimizer steps (0: run all epochs).
    long max_steps = 0;
    // Decay of an exponential moving average of the weights that replaces the
    // final weights when training ends (0: keep the last iterate).
    double ema_decay = 0.0;

    void validate() const {
        if (epochs < 1) throw usage_error("train: epochs must be >= 1");
        if (!(lr > 0.0)) throw usage_error("train: lr must be positive");
        if (warmup < 0) throw usage_error("train: warmup must be >= 0");
        if (batch_size < 1) throw usage_error("train: batch size must be >= 1");
        if (!(shuffle_rate >= 0.0 && shuffle_rate <= 1.0)) throw usage_error("train: shuffle rate must be in [0,1]");
        if (max_steps < 0) throw usage_error("train: max steps must be >= 0");
        if (!(ema_decay >= 0.0 && ema_decay < 1.0)) throw usage_error("train: ema decay must be in [0,1)");
    }
};

struct train_progress {
    int epoch = 0;
    long steps = 0;
    double epoch_loss = 0.0;
};

struct train_report {
    std::vector<double> epoch_loss;  // mean per-step cross-entropy
    double final_loss = 0.0;
    long steps = 0;
};

// Source presentation of one training page and the gold targets as indices
// into that presentation.
struct training_view {
    std::vector<int> source;   // page indices
    std::vector<int> targets;  // targets[k] = position of gold token k in source
};

inline training_view make_training_view(const page& p, bool shuffled, rng& r) {
    training_view v;
    v.source = shuffled ? r.permutation(p.size()) : heuristic_order(p.tokens);
    v.targets.assign(p.size(), 0);
    for (std::size_t i = 0; i < v.source.size(); ++i) v.targets[std::size_t(v.source[i])] = int(i);
    return v;
}

inline packed_sequence pack_training(const page& p, const training_view& v, const model_config& cfg) {
    return pack(reorder(p.tokens, v.source), p.width, p.height, v.targets, cfg);
}

// Mean teacher-forced cross-entropy per step over pages presented in heuristic order.
template <typename T>
double mean_loss(const layout_reader<T>& model, const std::vector<page>& pages) {
    double total = 0.0;
    long steps = 0;
    rng unused(0);
    for (const auto& p : pages) {
        const auto v = make_training_view(p, false, unused);
        total += double(model.loss(pack_training(p, v, model.config())));
        steps += long(p.size());
    }
    return steps ? total / double(steps) : 0.0;
}

// Minimizes mean cross-entropy of the gold source indices under teacher
// forcing. Deterministic for a given (model seed, options, data).
template <typename T>
train_report train(layout_reader<T>& model, const std::vector<page>& data, const train_options& opt,
                   const std::function<void(const train_progress&)>& on_epoch = {}) {
    opt.validate();
    if (data.empty()) throw data_error("train: empty dataset");
    for (const auto& p : data) check_source(p.tokens, p.width, p.height, model.config());

    adamw<T> optimizer(model.layout(), 0.9, 0.999, 1e-8, opt.weight_decay);
    flat_vector<T> grad(model.parameters().size(), T(0));
    flat_vector<T> ema;
    if (opt.ema_decay > 0.0) ema = model.parameters();
    train_report report;
    std::vector<std::size_t> order(data.size());

    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t(0));
        rng epoch_rng(opt.seed, 0xe90c4ull, std::uint64_t(epoch));
        epoch_rng.shuffle(order);

        double epoch_total = 0.0;
        long epoch_steps = 0;
        for (std::size_t start = 0; start < order.size(); start += std::size_t(opt.batch_size)) {
            const std::size_t end = std::min(order.size(), start + std::size_t(opt.batch_size));
            long batch_steps = 0;
            for (std::size_t i = start; i < end; ++i) batch_steps += long(data[order[i]].size());

            std::fill(grad.begin(), grad.end(), T(0));
            double batch_total = 0.0;
            for (std::size_t i = start; i < end; ++i) {
                const page& p = data[order[i]];
                rng page_rng(opt.seed, 0x9a6eull + std::uint64_t(epoch) * 0x100000001ull, order[i]);
                const bool shuffled = page_rng.bernoulli(opt.shuffle_rate);
                const auto view = make_training_view(p, shuffled, page_rng);
                batch_total += double(model.loss_and_grad(pack_training(p, view, model.config()), grad,
                                                          T(1) / T(batch_steps), &page_rng));
            }
            if (!std::isfinite(batch_total)) {
                std::ostringstream msg;
                msg << "train: loss diverged (" << batch_total << ") at epoch " << epoch << ", step " << report.steps
                    << ", lr " << warmup_rate(opt.lr, report.steps, opt.warmup);
                throw numeric_error(msg.str());
            }

            if (opt.max_grad_norm > 0.0) {
                double sq = 0.0;
                for (T g : grad) sq += double(g) * double(g);
                const double norm = std::sqrt(sq);
                if (!std::isfinite(norm)) throw numeric_error("train: non-finite gradient at step " + std::to_string(report.steps));
                if (norm > opt.max_grad_norm) {
                    const T f = T(opt.max_grad_norm / norm);
                    for (T& g : grad) g *= f;
                }
            }
            optimizer.step(model.parameters(), grad, warmup_rate(opt.lr, report.steps, opt.warmup));
            ++report.steps;
            if (!ema.empty()) {
                const T d = T(opt.ema_decay);
                const auto& w = model.parameters();
                for (std::size_t k = 0; k < ema.size(); ++k) ema[k] = d * ema[k] + (T(1) - d) * w[k];
            }
            epoch_total += batch_total;
            epoch_steps += batch_steps;
            if (opt.max_steps > 0 && report.steps >= opt.max_steps) break;
        }
        report.epoch_loss.push_back(epoch_total / double(epoch_steps));
        report.final_loss = report.epoch_loss.back();
        if (on_epoch) on_epoch({epoch, report.steps, report.final_loss});
        if (opt.max_steps > 0 && report.steps >= opt.max_steps) break;
    }
    if (!ema.empty()) model.parameters() = std::move(ema);
    return report;
}

} // namespace readorder::model
