#pragma once

#include <cmath>
#include <limits>
#include <type_traits>
#include <vector>

#include "readorder/model/params.hpp"

namespace readorder::model::nn {

template <typename T>
inline constexpr T layer_norm_eps = T(1e-5);

template <typename T>
struct ln_cache {
    matrix<T> xhat;
    row_vector<T> rstd;  // one entry per row
};

template <typename T, typename G, typename B>
matrix<T> layer_norm(const matrix<T>& x, const G& gamma, const B& beta, std::type_identity_t<ln_cache<T>>* cache) {
    const int rows = int(x.rows()), d = int(x.cols());
    matrix<T> xhat(rows, d);
    row_vector<T> rstd(rows);
    for (int i = 0; i < rows; ++i) {
        const T mean = x.row(i).mean();
        const T var = (x.row(i).array() - mean).square().mean();
        rstd(i) = T(1) / std::sqrt(var + layer_norm_eps<T>);
        xhat.row(i) = (x.row(i).array() - mean) * rstd(i);
    }
    matrix<T> y = (xhat.array().rowwise() * gamma.row(0).array()).rowwise() + beta.row(0).array();
    if (cache) {
        cache->xhat = std::move(xhat);
        cache->rstd = std::move(rstd);
    }
    return y;
}

// Accumulates parameter gradients and returns dL/dx.
template <typename T, typename G, typename DG, typename DB>
matrix<T> layer_norm_backward(const matrix<T>& dy, const ln_cache<T>& c, const G& gamma, DG&& dgamma, DB&& dbeta) {
    dgamma += (dy.array() * c.xhat.array()).colwise().sum().matrix();
    dbeta += dy.colwise().sum();
    const matrix<T> dxhat = dy.array().rowwise() * gamma.row(0).array();
    const int rows = int(dy.rows());
    const T inv_d = T(1) / T(dy.cols());
    matrix<T> dx(rows, dy.cols());
    for (int i = 0; i < rows; ++i) {
        const T m1 = dxhat.row(i).sum() * inv_d;
        const T m2 = dxhat.row(i).dot(c.xhat.row(i)) * inv_d;
        dx.row(i) = c.rstd(i) * (dxhat.row(i).array() - m1 - c.xhat.row(i).array() * m2);
    }
    return dx;
}

// tanh approximation of GELU, evaluated with Eigen's packet tanh.
template <typename T>
inline constexpr T gelu_c = T(0.7978845608028654);
template <typename T>
inline constexpr T gelu_k = T(0.044715);

template <typename T>
matrix<T> gelu(const matrix<T>& x) {
    const auto t = (gelu_c<T> * (x.array() + gelu_k<T> * x.array().cube())).tanh();
    return (T(0.5) * x.array() * (T(1) + t)).matrix();
}

template <typename T>
matrix<T> gelu_backward(const matrix<T>& dy, const matrix<T>& x) {
    const auto xa = x.array();
    const Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> t =
        (gelu_c<T> * (xa + gelu_k<T> * xa.cube())).tanh();
    const auto grad = T(0.5) * (T(1) + t) +
                      T(0.5) * xa * (T(1) - t.square()) * gelu_c<T> * (T(1) + T(3) * gelu_k<T> * xa.square());
    return (dy.array() * grad).matrix();
}

// Row-wise softmax in place; -inf entries get probability 0.
template <typename T>
void softmax_rows(matrix<T>& s) {
    for (int i = 0; i < s.rows(); ++i) {
        const T mx = s.row(i).maxCoeff();
        s.row(i) = (s.row(i).array() - mx).exp();
        s.row(i) /= s.row(i).sum();
    }
}

template <typename T>
inline constexpr T neg_inf = -std::numeric_limits<T>::infinity();

// Inverted dropout mask (entries 0 or 1/(1-p)); empty when inactive.
template <typename T>
matrix<T> dropout_mask(int rows, int cols, double p, rng* r) {
    if (p <= 0.0 || r == nullptr) return {};
    matrix<T> m(rows, cols);
    const T keep = T(1.0 / (1.0 - p));
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = r->bernoulli(p) ? T(0) : keep;
    return m;
}

template <typename T>
void apply_dropout(matrix<T>& x, const matrix<T>& mask) {
    if (mask.size() != 0) x.array() *= mask.array();
}

} // namespace readorder::model::nn
