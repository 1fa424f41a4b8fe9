#pragma once

// Layout-aware transformer encoder over a packed source+target sequence, with
// a pointer head scoring source positions. Everything is templated on the
// scalar so the same code trains in float and is gradient-checked in double.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "readorder/model/config.hpp"
#include "readorder/model/layers.hpp"
#include "readorder/model/packing.hpp"
#include "readorder/model/params.hpp"

namespace readorder::model {

template <typename T>
struct layer_cache {
    matrix<T> x_in;
    nn::ln_cache<T> ln1;
    matrix<T> a, q, k, v;
    std::vector<matrix<T>> probs;  // per head
    matrix<T> o;
    matrix<T> drop_attn;
    matrix<T> x_mid;
    nn::ln_cache<T> ln2;
    matrix<T> b, f;
    matrix<T> g;
    matrix<T> drop_ffn;
};

template <typename T>
struct forward_cache {
    nn::ln_cache<T> emb_ln;
    matrix<T> x0;  // embedding output before dropout; rows 1..n are the pointer keys
    matrix<T> drop_emb;
    std::vector<layer_cache<T>> layers;
    nn::ln_cache<T> final_ln;
    matrix<T> h;
    std::vector<int> query_rows;
    matrix<T> hq, u, gu;
    nn::ln_cache<T> head_ln;
    matrix<T> zq;
    matrix<T> logits;  // steps x n
};

// Per-layer keys/values of every row encoded so far, for incremental decoding.
template <typename T>
struct kv_cache {
    std::vector<matrix<T>> keys;
    std::vector<matrix<T>> values;
};

// Source-side state shared by all decoding hypotheses of one page.
template <typename T>
struct source_encoding {
    int n = 0;
    std::vector<token> tokens;
    std::int32_t width = 0, height = 0;
    matrix<T> keys_e;  // n x d source embeddings (pointer keys)
    row_vector<T> bos_hidden;  // final hidden state of the BOS row
    kv_cache<T> cache;  // source rows only
};

template <typename T>
class layout_reader {
public:
    explicit layout_reader(model_config cfg) : cfg_(validated(cfg)), lay_(cfg_), params_(init_parameters<T>(cfg_, lay_)) {}

    layout_reader(model_config cfg, flat_vector<T> params) : cfg_(validated(cfg)), lay_(cfg_), params_(std::move(params)) {
        if (params_.size() != lay_.total)
            throw data_error("model: expected " + std::to_string(lay_.total) + " parameters, got " +
                             std::to_string(params_.size()));
    }

    const model_config& config() const { return cfg_; }
    const param_layout& layout() const { return lay_; }
    flat_vector<T>& parameters() { return params_; }
    const flat_vector<T>& parameters() const { return params_; }

    template <typename U>
    layout_reader<U> cast() const {
        flat_vector<U> p(params_.begin(), params_.end());
        return layout_reader<U>(cfg_, std::move(p));
    }

    // Summed (pre-normalization) embedding of one packed row.
    row_vector<T> raw_embedding(slot_kind kind, int word, const std::array<int, 4>& box, int position) const {
        check_position(position);
        row_vector<T> e = row_of(params_, lay_.position, position);
        e += row_of(params_, lay_.segment, kind == slot_kind::target ? 1 : 0);
        if (kind == slot_kind::bos) {
            e += row_of(params_, lay_.bos, 0);
            return e;
        }
        if (cfg_.uses_words()) e += row_of(params_, lay_.word, word);
        if (cfg_.uses_layout()) {
            e += row_of(params_, lay_.x_coord, box[0]);
            e += row_of(params_, lay_.y_coord, box[1]);
            e += row_of(params_, lay_.x_coord, box[2]);
            e += row_of(params_, lay_.y_coord, box[3]);
        }
        return e;
    }

    // Layer-normalized input embeddings of every packed row.
    matrix<T> embed(const packed_sequence& s) const {
        return nn::layer_norm(raw_embeddings(s), view(params_, lay_.emb_ln_g), view(params_, lay_.emb_ln_b), nullptr);
    }

    // Embeddings of the source tokens alone (no BOS), in input order.
    matrix<T> embed_source(const std::vector<token>& source, std::int32_t width, std::int32_t height) const {
        const auto s = pack(source, width, height, {}, cfg_);
        return embed(s).bottomRows(s.n);
    }

    // Teacher-forced pointer logits: row k scores every source index for step k.
    matrix<T> pointer_logits(const packed_sequence& s) const {
        forward_cache<T> c;
        forward(s, c, nullptr);
        return c.logits;
    }

    // Summed cross-entropy of the gold targets under teacher forcing.
    T loss(const packed_sequence& s) const {
        forward_cache<T> c;
        forward(s, c, nullptr);
        return cross_entropy(c.logits, s.targets, nullptr, T(0));
    }

    // Adds scale * d(loss)/d(params) into grad and returns the summed loss.
    T loss_and_grad(const packed_sequence& s, flat_vector<T>& grad, T scale, rng* dropout = nullptr) const {
        if (grad.size() != params_.size()) grad.assign(params_.size(), T(0));
        forward_cache<T> c;
        forward(s, c, dropout);
        matrix<T> dlogits;
        const T total = cross_entropy(c.logits, s.targets, &dlogits, scale);
        backward(s, c, dlogits, grad);
        return total;
    }

    // ---- incremental decoding -------------------------------------------

    source_encoding<T> encode_source(const std::vector<token>& source, std::int32_t width, std::int32_t height) const {
        const auto s = pack(source, width, height, {}, cfg_);
        forward_cache<T> c;
        run_encoder(s, c, nullptr);
        source_encoding<T> enc;
        enc.n = s.n;
        enc.tokens = source;
        enc.width = width;
        enc.height = height;
        enc.keys_e = c.x0.bottomRows(s.n);
        enc.bos_hidden = c.h.row(0);
        enc.cache.keys.reserve(c.layers.size());
        enc.cache.values.reserve(c.layers.size());
        for (auto& l : c.layers) {
            enc.cache.keys.push_back(std::move(l.k));
            enc.cache.values.push_back(std::move(l.v));
        }
        return enc;
    }

    // Pointer logits for the first step (conditioned on BOS).
    row_vector<T> first_step_logits(const source_encoding<T>& enc) const { return head(enc.bos_hidden, enc.keys_e); }

    // Appends a target slot re-presenting source token `chosen` (the output of
    // step `slot`) and returns logits for step slot+1. `cache` starts as a
    // copy of enc.cache and grows by one row per layer per call.
    row_vector<T> step_logits(const source_encoding<T>& enc, kv_cache<T>& cache, int slot, int chosen) const {
        const auto& t = enc.tokens[std::size_t(chosen)];
        const int position = 1 + enc.n + slot;
        const row_vector<T> raw = raw_embedding(slot_kind::target, word_id(t.word, cfg_.vocab_size),
                                                normalize_box(t.box, enc.width, enc.height, cfg_.coord_grid), position);
        matrix<T> x = nn::layer_norm(matrix<T>(raw), view(params_, lay_.emb_ln_g), view(params_, lay_.emb_ln_b), nullptr);
        const int dh = cfg_.head_dim();
        const T scale = T(1) / std::sqrt(T(dh));
        for (std::size_t l = 0; l < lay_.layers.size(); ++l) {
            const auto& r = lay_.layers[l];
            const matrix<T> a = nn::layer_norm(x, view(params_, r.ln1_g), view(params_, r.ln1_b), nullptr);
            const matrix<T> q = affine(a, r.wq, r.bq);
            append_row(cache.keys[l], affine(a, r.wk, r.bk));
            append_row(cache.values[l], affine(a, r.wv, r.bv));
            const auto& K = cache.keys[l];
            const auto& V = cache.values[l];
            matrix<T> o(1, cfg_.hidden_dim);
            for (int h = 0; h < cfg_.heads; ++h) {
                matrix<T> sc = (q.middleCols(h * dh, dh) * K.middleCols(h * dh, dh).transpose()) * scale;
                nn::softmax_rows(sc);
                o.middleCols(h * dh, dh) = sc * V.middleCols(h * dh, dh);
            }
            x += affine(o, r.wo, r.bo);
            const matrix<T> b = nn::layer_norm(x, view(params_, r.ln2_g), view(params_, r.ln2_b), nullptr);
            x += affine(nn::gelu(affine(b, r.w1, r.b1)), r.w2, r.b2);
        }
        const matrix<T> h = nn::layer_norm(x, view(params_, lay_.final_ln_g), view(params_, lay_.final_ln_b), nullptr);
        return head(h.row(0), enc.keys_e);
    }

private:
    model_config cfg_;
    param_layout lay_;
    flat_vector<T> params_;

    static model_config validated(model_config c) {
        c.validate();
        return c;
    }

    void check_position(int position) const {
        if (position < 0 || position >= cfg_.max_positions())
            throw data_error("model: position " + std::to_string(position) + " beyond table");
    }

    matrix<T> affine(const matrix<T>& x, const tensor_ref& w, const tensor_ref& b) const {
        matrix<T> y = x * view(params_, w);
        y.rowwise() += row_of(params_, b, 0);
        return y;
    }

    static void append_row(matrix<T>& m, const matrix<T>& row) {
        m.conservativeResize(m.rows() + 1, Eigen::NoChange);
        m.row(m.rows() - 1) = row.row(0);
    }

    row_vector<T> head(const row_vector<T>& hidden, const matrix<T>& keys) const {
        matrix<T> u = affine(matrix<T>(hidden), lay_.head_w, lay_.head_b);
        const matrix<T> z = nn::layer_norm(nn::gelu(u), view(params_, lay_.head_ln_g), view(params_, lay_.head_ln_b), nullptr);
        return z * keys.transpose();
    }

    matrix<T> raw_embeddings(const packed_sequence& s) const {
        matrix<T> raw(s.length(), cfg_.hidden_dim);
        for (int i = 0; i < s.length(); ++i)
            raw.row(i) = raw_embedding(s.kinds[std::size_t(i)], s.word_ids[std::size_t(i)], s.boxes[std::size_t(i)],
                                       s.positions[std::size_t(i)]);
        return raw;
    }

    void run_encoder(const packed_sequence& s, forward_cache<T>& c, rng* dropout) const {
        c.x0 = nn::layer_norm(raw_embeddings(s), view(params_, lay_.emb_ln_g), view(params_, lay_.emb_ln_b), &c.emb_ln);
        matrix<T> x = c.x0;
        c.drop_emb = nn::dropout_mask<T>(int(x.rows()), int(x.cols()), cfg_.dropout, dropout);
        nn::apply_dropout(x, c.drop_emb);

        const int L = s.length(), dh = cfg_.head_dim();
        const T scale = T(1) / std::sqrt(T(dh));
        c.layers.resize(lay_.layers.size());
        for (std::size_t l = 0; l < lay_.layers.size(); ++l) {
            const auto& r = lay_.layers[l];
            auto& lc = c.layers[l];
            lc.x_in = x;
            lc.a = nn::layer_norm(x, view(params_, r.ln1_g), view(params_, r.ln1_b), &lc.ln1);
            lc.q = affine(lc.a, r.wq, r.bq);
            lc.k = affine(lc.a, r.wk, r.bk);
            lc.v = affine(lc.a, r.wv, r.bv);
            lc.o.resize(L, cfg_.hidden_dim);
            lc.probs.resize(std::size_t(cfg_.heads));
            for (int h = 0; h < cfg_.heads; ++h) {
                matrix<T> sc = (lc.q.middleCols(h * dh, dh) * lc.k.middleCols(h * dh, dh).transpose()) * scale;
                for (int i = 0; i < L; ++i)
                    for (int j = 0; j < L; ++j)
                        if (!s.mask.allowed(i, j)) sc(i, j) = nn::neg_inf<T>;
                nn::softmax_rows(sc);
                lc.o.middleCols(h * dh, dh) = sc * lc.v.middleCols(h * dh, dh);
                lc.probs[std::size_t(h)] = std::move(sc);
            }
            matrix<T> y = affine(lc.o, r.wo, r.bo);
            lc.drop_attn = nn::dropout_mask<T>(L, cfg_.hidden_dim, cfg_.dropout, dropout);
            nn::apply_dropout(y, lc.drop_attn);
            lc.x_mid = x + y;
            lc.b = nn::layer_norm(lc.x_mid, view(params_, r.ln2_g), view(params_, r.ln2_b), &lc.ln2);
            lc.f = affine(lc.b, r.w1, r.b1);
            lc.g = nn::gelu(lc.f);
            matrix<T> z = affine(lc.g, r.w2, r.b2);
            lc.drop_ffn = nn::dropout_mask<T>(L, cfg_.hidden_dim, cfg_.dropout, dropout);
            nn::apply_dropout(z, lc.drop_ffn);
            x = lc.x_mid + z;
        }
        c.h = nn::layer_norm(x, view(params_, lay_.final_ln_g), view(params_, lay_.final_ln_b), &c.final_ln);
    }

    void forward(const packed_sequence& s, forward_cache<T>& c, rng* dropout) const {
        if (int(s.targets.size()) != s.n || s.n_target_slots() != s.n - 1)
            throw data_error("model: packed sequence lacks teacher-forced targets");
        run_encoder(s, c, dropout);
        c.query_rows.resize(std::size_t(s.n));
        c.hq.resize(s.n, cfg_.hidden_dim);
        for (int k = 0; k < s.n; ++k) {
            c.query_rows[std::size_t(k)] = s.query_row(k);
            c.hq.row(k) = c.h.row(s.query_row(k));
        }
        c.u = affine(c.hq, lay_.head_w, lay_.head_b);
        c.gu = nn::gelu(c.u);
        c.zq = nn::layer_norm(c.gu, view(params_, lay_.head_ln_g), view(params_, lay_.head_ln_b), &c.head_ln);
        c.logits = c.zq * c.x0.middleRows(1, s.n).transpose();
    }

    static T cross_entropy(const matrix<T>& logits, const std::vector<int>& targets, matrix<T>* dlogits, T scale) {
        T total = T(0);
        if (dlogits) dlogits->resize(logits.rows(), logits.cols());
        for (int k = 0; k < logits.rows(); ++k) {
            const T mx = logits.row(k).maxCoeff();
            const row_vector<T> ex = (logits.row(k).array() - mx).exp();
            const T z = ex.sum();
            const int t = targets[std::size_t(k)];
            total += std::log(z) + mx - logits(k, t);
            if (dlogits) {
                dlogits->row(k) = ex / z * scale;
                (*dlogits)(k, t) -= scale;
            }
        }
        return total;
    }

    void backward(const packed_sequence& s, const forward_cache<T>& c, const matrix<T>& dlogits, flat_vector<T>& grad) const {
        const int L = s.length(), n = s.n, d = cfg_.hidden_dim, dh = cfg_.head_dim();
        const T scale = T(1) / std::sqrt(T(dh));
        auto gview = [&](const tensor_ref& r) { return view(grad, r); };
        auto accumulate_affine = [&](const matrix<T>& x, const matrix<T>& dy, const tensor_ref& w, const tensor_ref& b) {
            gview(w).noalias() += x.transpose() * dy;
            gview(b) += dy.colwise().sum();
            return matrix<T>(dy * view(params_, w).transpose());
        };

        // Pointer head.
        matrix<T> dx0 = matrix<T>::Zero(L, d);
        const matrix<T> dzq = dlogits * c.x0.middleRows(1, n);
        dx0.middleRows(1, n).noalias() += dlogits.transpose() * c.zq;
        const matrix<T> dgu = nn::layer_norm_backward(dzq, c.head_ln, view(params_, lay_.head_ln_g),
                                                      gview(lay_.head_ln_g), gview(lay_.head_ln_b));
        const matrix<T> du = nn::gelu_backward(dgu, c.u);
        const matrix<T> dhq = accumulate_affine(c.hq, du, lay_.head_w, lay_.head_b);
        matrix<T> dh_all = matrix<T>::Zero(L, d);
        for (int k = 0; k < n; ++k) dh_all.row(c.query_rows[std::size_t(k)]) += dhq.row(k);

        matrix<T> dx = nn::layer_norm_backward(dh_all, c.final_ln, view(params_, lay_.final_ln_g),
                                               gview(lay_.final_ln_g), gview(lay_.final_ln_b));

        for (std::size_t li = lay_.layers.size(); li-- > 0;) {
            const auto& r = lay_.layers[li];
            const auto& lc = c.layers[li];
            // x_out = x_mid + dropout(ffn(ln2(x_mid)))
            matrix<T> dz = dx;
            nn::apply_dropout(dz, lc.drop_ffn);
            const matrix<T> dg = accumulate_affine(lc.g, dz, r.w2, r.b2);
            const matrix<T> df = nn::gelu_backward(dg, lc.f);
            const matrix<T> db = accumulate_affine(lc.b, df, r.w1, r.b1);
            matrix<T> dmid = dx + nn::layer_norm_backward(db, lc.ln2, view(params_, r.ln2_g), gview(r.ln2_g), gview(r.ln2_b));

            // x_mid = x_in + dropout(attn(ln1(x_in)))
            matrix<T> dy = dmid;
            nn::apply_dropout(dy, lc.drop_attn);
            const matrix<T> dO = accumulate_affine(lc.o, dy, r.wo, r.bo);
            matrix<T> dq(L, d), dk(L, d), dv(L, d);
            for (int h = 0; h < cfg_.heads; ++h) {
                const auto& P = lc.probs[std::size_t(h)];
                const matrix<T> dOh = dO.middleCols(h * dh, dh);
                const matrix<T> dP = dOh * lc.v.middleCols(h * dh, dh).transpose();
                dv.middleCols(h * dh, dh) = P.transpose() * dOh;
                matrix<T> dS = P.array() * (dP.colwise() - (dP.array() * P.array()).rowwise().sum().matrix()).array();
                dS *= scale;
                dq.middleCols(h * dh, dh) = dS * lc.k.middleCols(h * dh, dh);
                dk.middleCols(h * dh, dh) = dS.transpose() * lc.q.middleCols(h * dh, dh);
            }
            matrix<T> da = accumulate_affine(lc.a, dq, r.wq, r.bq);
            da += accumulate_affine(lc.a, dk, r.wk, r.bk);
            da += accumulate_affine(lc.a, dv, r.wv, r.bv);
            dx = dmid + nn::layer_norm_backward(da, lc.ln1, view(params_, r.ln1_g), gview(r.ln1_g), gview(r.ln1_b));
        }

        nn::apply_dropout(dx, c.drop_emb);
        dx0 += dx;
        const matrix<T> draw = nn::layer_norm_backward(dx0, c.emb_ln, view(params_, lay_.emb_ln_g),
                                                       gview(lay_.emb_ln_g), gview(lay_.emb_ln_b));
        for (int i = 0; i < L; ++i) {
            const auto kind = s.kinds[std::size_t(i)];
            const auto g = draw.row(i);
            row_of(grad, lay_.position, s.positions[std::size_t(i)]) += g;
            row_of(grad, lay_.segment, kind == slot_kind::target ? 1 : 0) += g;
            if (kind == slot_kind::bos) {
                row_of(grad, lay_.bos, 0) += g;
                continue;
            }
            if (cfg_.uses_words()) row_of(grad, lay_.word, s.word_ids[std::size_t(i)]) += g;
            if (cfg_.uses_layout()) {
                const auto& b = s.boxes[std::size_t(i)];
                row_of(grad, lay_.x_coord, b[0]) += g;
                row_of(grad, lay_.y_coord, b[1]) += g;
                row_of(grad, lay_.x_coord, b[2]) += g;
                row_of(grad, lay_.y_coord, b[3]) += g;
            }
        }
    }
};

} // namespace readorder::model
