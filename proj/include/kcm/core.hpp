#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kcm/errors.hpp"
#include "kcm/fenwick.hpp"

namespace kcm {

using card_t = std::int32_t;

namespace detail {

inline void check_positive_length(std::size_t n, const char* what) {
    if (n == 0) {
        throw validation_error(std::string(what) + " must have length >= 1");
    }
}

} // namespace detail

/// A deck permutation in removal order: entry t (1-based) is the card removed
/// at time t. Immutable after construction; construction validates that the
/// entries are a bijection on {1,...,n}.
class permutation {
public:
    explicit permutation(std::vector<card_t> cards) : cards_(std::move(cards)) {
        detail::check_positive_length(cards_.size(), "permutation");
        const auto n = static_cast<card_t>(cards_.size());
        std::vector<std::uint8_t> seen(static_cast<std::size_t>(n) + 1, 0);
        for (std::size_t i = 0; i < cards_.size(); ++i) {
            const card_t c = cards_[i];
            if (c < 1 || c > n) {
                throw validation_error("permutation entry at index " + std::to_string(i + 1) +
                                       " is out of range: " + std::to_string(c));
            }
            if (seen[static_cast<std::size_t>(c)]) {
                throw validation_error("permutation entry at index " + std::to_string(i + 1) +
                                       " duplicates card " + std::to_string(c));
            }
            seen[static_cast<std::size_t>(c)] = 1;
        }
    }

    static permutation identity(card_t n) {
        std::vector<card_t> cards(static_cast<std::size_t>(n));
        for (card_t i = 0; i < n; ++i) cards[static_cast<std::size_t>(i)] = i + 1;
        return permutation(std::move(cards));
    }

    static permutation reversal(card_t n) {
        std::vector<card_t> cards(static_cast<std::size_t>(n));
        for (card_t i = 0; i < n; ++i) cards[static_cast<std::size_t>(i)] = n - i;
        return permutation(std::move(cards));
    }

    card_t size() const { return static_cast<card_t>(cards_.size()); }

    /// Card removed at time t, t in [1, n].
    card_t at(card_t t) const { return cards_[static_cast<std::size_t>(t - 1)]; }

    const std::vector<card_t>& cards() const { return cards_; }

    bool operator==(const permutation&) const = default;

private:
    std::vector<card_t> cards_;
};

/// The relative-position sequence: entry t is the rank of the removed card
/// within the deck remaining at time t, so entry t lies in [1, n-t+1] and the
/// final entry is always 1. Validated eagerly.
class relative_seq {
public:
    explicit relative_seq(std::vector<card_t> rel) : rel_(std::move(rel)) {
        detail::check_positive_length(rel_.size(), "relative sequence");
        const auto n = static_cast<card_t>(rel_.size());
        for (card_t t = 1; t <= n; ++t) {
            const card_t r = rel_[static_cast<std::size_t>(t - 1)];
            if (r < 1 || r > n - t + 1) {
                throw validation_error("relative position at index " + std::to_string(t) +
                                       " is out of range [1, " + std::to_string(n - t + 1) +
                                       "]: " + std::to_string(r));
            }
        }
    }

    card_t size() const { return static_cast<card_t>(rel_.size()); }

    /// Relative position at time t, t in [1, n].
    card_t at(card_t t) const { return rel_[static_cast<std::size_t>(t - 1)]; }

    const std::vector<card_t>& values() const { return rel_; }

    bool operator==(const relative_seq&) const = default;

private:
    std::vector<card_t> rel_;
};

/// The set of cards still in the deck at time t. A thin stateful view used
/// when walking the removal process step by step.
class deck_state {
public:
    explicit deck_state(card_t n) : set_(n), time_(1) {}

    card_t time() const { return time_; }
    card_t size() const { return set_.size(); }
    bool contains(card_t c) const { return set_.contains(c); }

    /// j-th lowest remaining card, j in [1, size()].
    card_t select(card_t j) const { return set_.select(j); }

    /// Rank of a remaining card within the deck.
    card_t rank_of(card_t c) const { return set_.rank_of(c); }

    /// Remove a card and advance the clock.
    void remove(card_t c) {
        set_.erase(c);
        ++time_;
    }

    std::vector<card_t> remaining() const {
        std::vector<card_t> out;
        out.reserve(static_cast<std::size_t>(set_.size()));
        for (card_t r = 1; r <= set_.size(); ++r) out.push_back(set_.select(r));
        return out;
    }

private:
    rank_select_set set_;
    card_t time_;
};

/// Realize the permutation encoded by a relative-position sequence:
/// at each time t the rel[t]-th lowest remaining card is removed. O(n log n).
inline permutation relative_to_permutation(const relative_seq& rel) {
    const card_t n = rel.size();
    rank_select_set deck(n);
    std::vector<card_t> cards;
    cards.reserve(static_cast<std::size_t>(n));
    for (card_t t = 1; t <= n; ++t) {
        const card_t c = deck.select(rel.at(t));
        deck.erase(c);
        cards.push_back(c);
    }
    return permutation(std::move(cards));
}

/// Inverse of relative_to_permutation. O(n log n).
inline relative_seq permutation_to_relative(const permutation& perm) {
    const card_t n = perm.size();
    rank_select_set deck(n);
    std::vector<card_t> rel;
    rel.reserve(static_cast<std::size_t>(n));
    for (card_t t = 1; t <= n; ++t) {
        const card_t c = perm.at(t);
        rel.push_back(deck.rank_of(c));
        deck.erase(c);
    }
    return relative_seq(std::move(rel));
}

// One-line space-separated text format, 1-based integers.

inline std::string to_text(const std::vector<card_t>& values) {
    std::ostringstream out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out << ' ';
        out << values[i];
    }
    out << '\n';
    return out.str();
}

inline std::string to_text(const permutation& p) { return to_text(p.cards()); }
inline std::string to_text(const relative_seq& r) { return to_text(r.values()); }

inline std::vector<card_t> parse_card_line(const std::string& line) {
    std::istringstream in(line);
    std::vector<card_t> values;
    long long v = 0;
    while (in >> v) values.push_back(static_cast<card_t>(v));
    if (!in.eof()) {
        throw validation_error("malformed integer in line: " + line);
    }
    return values;
}

inline permutation parse_permutation_text(const std::string& line) {
    return permutation(parse_card_line(line));
}

inline relative_seq parse_relative_text(const std::string& line) {
    return relative_seq(parse_card_line(line));
}

} // namespace kcm
