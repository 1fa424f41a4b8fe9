#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "readorder/model/params.hpp"

namespace readorder::model {

// Adam with decoupled weight decay. Decay applies to matrices only, not to
// biases or layer-norm parameters.
template <typename T>
class adamw {
public:
    adamw(const param_layout& lay, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8, double weight_decay = 0.01)
        : m_(lay.total, T(0)), v_(lay.total, T(0)), decay_(lay.total, 0), beta1_(beta1), beta2_(beta2), eps_(eps), wd_(weight_decay) {
        auto mark = [&](const tensor_ref& r) {
            if (r.rows > 1) std::fill(decay_.begin() + std::ptrdiff_t(r.offset), decay_.begin() + std::ptrdiff_t(r.offset + r.size()), 1);
        };
        for (const auto* r : {&lay.word, &lay.position, &lay.x_coord, &lay.y_coord, &lay.segment, &lay.head_w}) mark(*r);
        for (const auto& l : lay.layers)
            for (const auto* r : {&l.wq, &l.wk, &l.wv, &l.wo, &l.w1, &l.w2}) mark(*r);
    }

    void step(flat_vector<T>& params, const flat_vector<T>& grad, double lr) {
        ++t_;
        const double c1 = 1.0 - std::pow(beta1_, double(t_));
        const double c2 = 1.0 - std::pow(beta2_, double(t_));
        const T b1 = T(beta1_), b2 = T(beta2_);
        const T step_size = T(lr / c1);
        const T inv_c2 = T(1.0 / c2);
        const T decay = T(lr * wd_);
        const T eps = T(eps_);
        for (std::size_t i = 0; i < params.size(); ++i) {
            const T g = grad[i];
            m_[i] = b1 * m_[i] + (T(1) - b1) * g;
            v_[i] = b2 * v_[i] + (T(1) - b2) * g * g;
            if (decay_[i]) params[i] -= decay * params[i];
            params[i] -= step_size * m_[i] / (std::sqrt(v_[i] * inv_c2) + eps);
        }
    }

    long steps() const { return t_; }

private:
    flat_vector<T> m_, v_;
    std::vector<char> decay_;
    double beta1_, beta2_, eps_, wd_;
    long t_ = 0;
};

// Linear warmup to `peak` over `warmup` steps, then constant.
inline double warmup_rate(double peak, long step, long warmup) {
    if (warmup <= 0) return peak;
    return peak * std::min(1.0, double(step + 1) / double(warmup));
}

} // namespace readorder::model
