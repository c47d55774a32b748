#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <vector>

#include "kcm/errors.hpp"

namespace kcm {

/// Ordered set over {1,...,n} with logarithmic select-by-rank and erase,
/// backed by a binary indexed tree of presence counts. This is the structure
/// behind all deck bookkeeping: resolving a relative position to a card and
/// removing cards are both O(log n).
class rank_select_set {
public:
    explicit rank_select_set(std::int32_t n) : n_(n), present_(n + 1, 1), tree_(n + 1, 0) {
        assert(n >= 0);
        high_bit_ = 1;
        while ((high_bit_ << 1) <= n_) high_bit_ <<= 1;
        fill_all();
    }

    /// Reset to the full set {1,...,n} without reallocating.
    void fill_all() {
        size_ = n_;
        for (std::int32_t i = 0; i <= n_; ++i) tree_[i] = 0;
        for (std::int32_t i = 1; i <= n_; ++i) {
            present_[i] = 1;
            tree_[i] += 1;
            const std::int32_t j = i + (i & -i);
            if (j <= n_) tree_[j] += tree_[i];
        }
    }

    /// Reset to the empty set without reallocating.
    void clear() {
        size_ = 0;
        std::fill(present_.begin(), present_.end(), std::uint8_t{0});
        std::fill(tree_.begin(), tree_.end(), 0);
    }

    std::int32_t universe() const { return n_; }
    std::int32_t size() const { return size_; }
    bool empty() const { return size_ == 0; }
    bool contains(std::int32_t value) const { return present_[value] != 0; }

    /// Number of present elements <= value.
    std::int32_t rank_of(std::int32_t value) const {
        std::int32_t count = 0;
        for (std::int32_t i = value; i > 0; i -= i & -i) count += tree_[i];
        return count;
    }

    /// The r-th smallest present element, r in [1, size()].
    std::int32_t select(std::int32_t r) const {
        assert(r >= 1 && r <= size_);
        std::int32_t pos = 0;
        for (std::int32_t step = high_bit_; step > 0; step >>= 1) {
            const std::int32_t next = pos + step;
            if (next <= n_ && tree_[next] < r) {
                pos = next;
                r -= tree_[next];
            }
        }
        return pos + 1;
    }

    void erase(std::int32_t value) {
        assert(present_[value]);
        present_[value] = 0;
        --size_;
        for (std::int32_t i = value; i <= n_; i += i & -i) tree_[i] -= 1;
    }

    void insert(std::int32_t value) {
        assert(!present_[value]);
        present_[value] = 1;
        ++size_;
        for (std::int32_t i = value; i <= n_; i += i & -i) tree_[i] += 1;
    }

private:
    std::int32_t n_;
    std::int32_t size_ = 0;
    std::int32_t high_bit_ = 1;
    std::vector<std::uint8_t> present_;
    std::vector<std::int32_t> tree_;
};

} // namespace kcm
