#include "nbpa/context_set.hpp"

#include <algorithm>
#include <bit>

namespace nbpa {

ContextSet::ContextSet(std::size_t universe, std::span<const Var> members) : ContextSet(universe) {
    for (Var v : members) {
        if (v >= universe) {
            throw Error("context member out of range");
        }
        insert(v);
    }
}

bool ContextSet::empty() const noexcept {
    return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
}

std::size_t ContextSet::size() const noexcept {
    std::size_t n = 0;
    for (std::uint64_t w : words_) {
        n += static_cast<std::size_t>(std::popcount(w));
    }
    return n;
}

std::vector<Var> ContextSet::members() const {
    std::vector<Var> out;
    for (std::size_t i = 0; i < words_.size(); ++i) {
        std::uint64_t w = words_[i];
        while (w != 0) {
            const int bit = std::countr_zero(w);
            out.push_back(static_cast<Var>(i * 64 + static_cast<std::size_t>(bit)));
            w &= w - 1;
        }
    }
    return out;
}

bool ContextSet::covers(std::span<const Var> config) const noexcept {
    return std::all_of(config.begin(), config.end(), [this](Var v) { return contains(v); });
}

std::string ContextSet::key(const BpaSystem& system) const {
    std::string out;
    for (Var v : members()) {
        if (!out.empty()) {
            out += ',';
        }
        out += system.var_name(v);
    }
    return out;
}

std::string ContextSet::str(const BpaSystem& system) const {
    std::string out = "{";
    bool first = true;
    for (Var v : members()) {
        if (!first) {
            out += ", ";
        }
        first = false;
        out += system.var_name(v);
    }
    return out + "}";
}

std::size_t ContextSet::hash() const noexcept {
    std::size_t h = 0x84222325cbf29ce4ULL ^ universe_;
    for (std::uint64_t w : words_) {
        h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

std::strong_ordering operator<=>(const ContextSet& a, const ContextSet& b) {
    const auto ma = a.members();
    const auto mb = b.members();
    if (auto c = std::lexicographical_compare_three_way(ma.begin(), ma.end(), mb.begin(), mb.end());
        c != 0) {
        return c;
    }
    return a.universe_ <=> b.universe_;
}

} // namespace nbpa
