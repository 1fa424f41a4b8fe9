#pragma once

#include <cstdint>
#include <vector>

namespace readorder::model {

// Row i may attend to column j when allowed(i, j).
struct attention_mask {
    int n_src = 0;
    int n_tgt = 0;
    std::vector<std::uint8_t> cells;

    int size() const { return n_src + n_tgt; }
    bool allowed(int i, int j) const { return cells[std::size_t(i) * std::size_t(size()) + std::size_t(j)] != 0; }
};

// Source positions see the whole source; target positions see the whole
// source plus target positions at or before their own.
inline attention_mask build_mask(int n_src, int n_tgt) {
    attention_mask m{n_src, n_tgt, {}};
    const int L = m.size();
    m.cells.assign(std::size_t(L) * std::size_t(L), 0);
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) {
            const bool j_src = j < n_src;
            const bool both_tgt = i >= n_src && j >= n_src;
            m.cells[std::size_t(i) * std::size_t(L) + std::size_t(j)] = (j_src || (both_tgt && j <= i)) ? 1 : 0;
        }
    return m;
}

} // namespace readorder::model
