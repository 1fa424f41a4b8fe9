#pragma once

#include <cmath>
#include <vector>

#include "readorder/error.hpp"
#include "readorder/model/params.hpp"

namespace readorder::model {

// logit_i = e_i . h for each source embedding row e_i.
template <typename T>
row_vector<T> pointer_logits(const row_vector<T>& hidden, const matrix<T>& source) {
    if (source.rows() == 0) throw data_error("pointer_logits: no source positions");
    if (source.cols() != hidden.cols()) throw data_error("pointer_logits: dimension mismatch");
    return hidden * source.transpose();
}

template <typename T>
row_vector<T> softmax(const row_vector<T>& logits) {
    const T mx = logits.maxCoeff();
    row_vector<T> p = (logits.array() - mx).exp();
    return p / p.sum();
}

template <typename T>
row_vector<T> log_softmax(const row_vector<T>& logits) {
    const T mx = logits.maxCoeff();
    const T lse = mx + std::log((logits.array() - mx).exp().sum());
    return logits.array() - lse;
}

// -log P(target) and its gradients with respect to hidden and source.
template <typename T>
struct pointer_nll_result {
    T value;
    row_vector<T> d_hidden;
    matrix<T> d_source;
};

template <typename T>
pointer_nll_result<T> pointer_nll(const row_vector<T>& hidden, const matrix<T>& source, int target) {
    const row_vector<T> logits = pointer_logits(hidden, source);
    row_vector<T> dlogits = softmax(logits);
    const T value = -log_softmax(logits)(target);
    dlogits(target) -= T(1);
    return {value, dlogits * source, dlogits.transpose() * hidden};
}

} // namespace readorder::model
