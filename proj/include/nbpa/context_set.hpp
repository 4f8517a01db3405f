#pragma once

#include "nbpa/grammar.hpp"

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nbpa {

/// A set of variables R, standing for red(γ) of some suffix γ.  Fixed
/// universe size; ordering and printing follow declaration order.
class ContextSet {
public:
    ContextSet() = default;
    explicit ContextSet(std::size_t universe) : universe_(universe), words_((universe + 63) / 64, 0) {}
    ContextSet(std::size_t universe, std::span<const Var> members);

    std::size_t universe() const noexcept { return universe_; }

    bool contains(Var v) const noexcept {
        return v < universe_ && ((words_[v / 64] >> (v % 64)) & 1U) != 0;
    }
    void insert(Var v) { words_.at(v / 64) |= std::uint64_t{1} << (v % 64); }
    void erase(Var v) { words_.at(v / 64) &= ~(std::uint64_t{1} << (v % 64)); }

    bool empty() const noexcept;
    std::size_t size() const noexcept;
    std::vector<Var> members() const;

    /// True iff every symbol of `config` is a member.
    bool covers(std::span<const Var> config) const noexcept;

    /// Comma-joined member names; "" for the empty set.
    std::string key(const BpaSystem& system) const;
    /// "{A, B}" style rendering.
    std::string str(const BpaSystem& system) const;

    std::size_t hash() const noexcept;

    friend bool operator==(const ContextSet& a, const ContextSet& b) noexcept {
        return a.universe_ == b.universe_ && a.words_ == b.words_;
    }
    /// Lexicographic on the sorted member lists.
    friend std::strong_ordering operator<=>(const ContextSet& a, const ContextSet& b);

private:
    std::size_t universe_ = 0;
    std::vector<std::uint64_t> words_;
};

struct ContextSetHash {
    std::size_t operator()(const ContextSet& s) const noexcept { return s.hash(); }
};

} // namespace nbpa
