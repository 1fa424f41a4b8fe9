#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "readorder/model/config.hpp"
#include "readorder/random.hpp"

namespace readorder::model {

template <typename T>
using matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using row_vector = Eigen::Matrix<T, 1, Eigen::Dynamic>;

// Flat storage for parameters, gradients and optimizer moments. The base
// address is aligned so each tensor's alignment depends only on its offset;
// vectorized reductions then round identically for every buffer.
template <typename T>
using flat_vector = std::vector<T, Eigen::aligned_allocator<T>>;

// A named slice of the flat parameter vector.
struct tensor_ref {
    std::size_t offset = 0;
    int rows = 0;
    int cols = 0;

    std::size_t size() const { return std::size_t(rows) * std::size_t(cols); }
};

struct layer_refs {
    tensor_ref ln1_g, ln1_b;
    tensor_ref wq, bq, wk, bk, wv, bv, wo, bo;
    tensor_ref ln2_g, ln2_b;
    tensor_ref w1, b1, w2, b2;
};

// Offsets of every tensor; parameters, gradients and optimizer moments all
// share this layout.
struct param_layout {
    // Corner embeddings: x0 and x1 look up x_coord, y0 and y1 look up y_coord.
    tensor_ref word, position, x_coord, y_coord, segment, bos;
    tensor_ref emb_ln_g, emb_ln_b;
    std::vector<layer_refs> layers;
    tensor_ref final_ln_g, final_ln_b;
    tensor_ref head_w, head_b, head_ln_g, head_ln_b;
    std::size_t total = 0;

    explicit param_layout(const model_config& c) {
        const int d = c.hidden_dim, g = c.coord_grid + 1;
        word = take(c.vocab_size, d);
        position = take(c.max_positions(), d);
        x_coord = take(g, d);
        y_coord = take(g, d);
        segment = take(2, d);
        bos = take(1, d);
        emb_ln_g = take(1, d);
        emb_ln_b = take(1, d);
        for (int l = 0; l < c.layers; ++l) {
            layer_refs r;
            r.ln1_g = take(1, d);
            r.ln1_b = take(1, d);
            r.wq = take(d, d);
            r.bq = take(1, d);
            r.wk = take(d, d);
            r.bk = take(1, d);
            r.wv = take(d, d);
            r.bv = take(1, d);
            r.wo = take(d, d);
            r.bo = take(1, d);
            r.ln2_g = take(1, d);
            r.ln2_b = take(1, d);
            r.w1 = take(d, c.ffn_dim);
            r.b1 = take(1, c.ffn_dim);
            r.w2 = take(c.ffn_dim, d);
            r.b2 = take(1, d);
            layers.push_back(r);
        }
        final_ln_g = take(1, d);
        final_ln_b = take(1, d);
        head_w = take(d, d);
        head_b = take(1, d);
        head_ln_g = take(1, d);
        head_ln_b = take(1, d);
    }

private:
    tensor_ref take(int rows, int cols) {
        tensor_ref r{total, rows, cols};
        total += r.size();
        return r;
    }
};

template <typename T>
Eigen::Map<matrix<T>> view(flat_vector<T>& flat, const tensor_ref& r) {
    return {flat.data() + r.offset, r.rows, r.cols};
}

template <typename T>
Eigen::Map<const matrix<T>> view(const flat_vector<T>& flat, const tensor_ref& r) {
    return {flat.data() + r.offset, r.rows, r.cols};
}

template <typename T>
Eigen::Map<row_vector<T>> row_of(flat_vector<T>& flat, const tensor_ref& r, int row) {
    return {flat.data() + r.offset + std::size_t(row) * std::size_t(r.cols), r.cols};
}

template <typename T>
Eigen::Map<const row_vector<T>> row_of(const flat_vector<T>& flat, const tensor_ref& r, int row) {
    return {flat.data() + r.offset + std::size_t(row) * std::size_t(r.cols), r.cols};
}

namespace detail {

// Random orthogonal d x d matrix (Gram-Schmidt on Gaussian columns).
inline matrix<double> random_rotation(int d, rng& r) {
    matrix<double> g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = r.normal();
    Eigen::HouseholderQR<matrix<double>> qr(g);
    return qr.householderQ();
}

// Sinusoidal table rows for values 0..rows-1 with wavelengths spaced
// geometrically between min_wave and max_wave, mixed by a random rotation so
// families sharing the hidden space stay distinguishable.
template <typename T>
void sinusoid_init(Eigen::Map<matrix<T>> table, double min_wave, double max_wave, double scale, rng& r) {
    const int d = int(table.cols());
    const int half = d / 2;
    const matrix<double> rot = random_rotation(d, r);
    row_vector<double> s(d);
    for (int v = 0; v < table.rows(); ++v) {
        for (int i = 0; i < half; ++i) {
            const double t = half > 1 ? double(i) / double(half - 1) : 0.0;
            const double wave = min_wave * std::pow(max_wave / min_wave, t);
            const double angle = 6.283185307179586 * double(v) / wave;
            s(2 * i) = std::sin(angle);
            s(2 * i + 1) = std::cos(angle);
        }
        table.row(v) = (scale * s * rot).template cast<T>();
    }
}

template <typename T>
void normal_init(Eigen::Map<matrix<T>> m, double stddev, rng& r) {
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) m(i, j) = T(stddev * r.normal());
}

} // namespace detail

// Deterministic initialization from cfg.seed: Gaussian(0, 0.02) weights,
// unit layer-norm gains, sinusoidal position and coordinate tables.
template <typename T>
flat_vector<T> init_parameters(const model_config& cfg, const param_layout& lay) {
    flat_vector<T> p(lay.total, T(0));
    rng r(cfg.seed, 0x5eed'1a70'0751ull);
    constexpr double stddev = 0.02;
    const double table_scale = 0.5;
    const double grid = double(cfg.coord_grid);

    detail::normal_init(view(p, lay.word), stddev, r);
    detail::sinusoid_init(view(p, lay.position), 4.0, 4.0 * cfg.max_positions(), table_scale, r);
    for (const auto* t : {&lay.x_coord, &lay.y_coord})
        detail::sinusoid_init(view(p, *t), std::max(4.0, grid / 250.0), 4.0 * grid, table_scale, r);
    detail::normal_init(view(p, lay.segment), stddev, r);
    detail::normal_init(view(p, lay.bos), stddev, r);
    view(p, lay.emb_ln_g).setOnes();
    for (const auto& l : lay.layers) {
        view(p, l.ln1_g).setOnes();
        view(p, l.ln2_g).setOnes();
        for (const auto* w : {&l.wq, &l.wk, &l.wv, &l.wo, &l.w1, &l.w2}) detail::normal_init(view(p, *w), stddev, r);
    }
    view(p, lay.final_ln_g).setOnes();
    detail::normal_init(view(p, lay.head_w), stddev, r);
    view(p, lay.head_ln_g).setOnes();
    return p;
}

} // namespace readorder::model
