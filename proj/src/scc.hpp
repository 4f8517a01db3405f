#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace nbpa::detail {

/// Tarjan's algorithm without recursion.  Component ids are assigned in
/// completion order, so every arc goes from a higher or equal id to a lower
/// or equal one (successor components first).
inline std::vector<std::uint32_t> strongly_connected(
    const std::vector<std::vector<std::uint32_t>>& adj, std::uint32_t* count = nullptr) {
    const std::uint32_t n = static_cast<std::uint32_t>(adj.size());
    constexpr std::uint32_t kUnset = static_cast<std::uint32_t>(-1);
    std::vector<std::uint32_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
    std::vector<std::uint32_t> stack;
    std::vector<std::uint8_t> on_stack(n, 0);
    std::vector<std::pair<std::uint32_t, std::size_t>> frames;
    std::uint32_t next_index = 0;
    std::uint32_t next_comp = 0;

    for (std::uint32_t root = 0; root < n; ++root) {
        if (index[root] != kUnset) {
            continue;
        }
        frames.push_back({root, 0});
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!frames.empty()) {
            auto& [v, pos] = frames.back();
            if (pos < adj[v].size()) {
                const std::uint32_t w = adj[v][pos++];
                if (index[w] == kUnset) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    frames.push_back({w, 0});
                } else if (on_stack[w] != 0) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            const std::uint32_t done = v;
            frames.pop_back();
            if (!frames.empty()) {
                const std::uint32_t parent = frames.back().first;
                low[parent] = std::min(low[parent], low[done]);
            }
            if (low[done] == index[done]) {
                std::uint32_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp[w] = next_comp;
                } while (w != done);
                ++next_comp;
            }
        }
    }
    if (count != nullptr) {
        *count = next_comp;
    }
    return comp;
}

} // namespace nbpa::detail
