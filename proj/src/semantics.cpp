#include "nbpa/semantics.hpp"

#include <deque>
#include <unordered_set>

namespace nbpa {

std::size_t ConfigurationHash::operator()(const Configuration& c) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL ^ c.size();
    for (Var v : c) {
        h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

Configuration apply_rule(std::span<const Var> config, std::span<const Var> body) {
    Configuration out;
    out.reserve(body.size() + config.size() - 1);
    out.insert(out.end(), body.begin(), body.end());
    out.insert(out.end(), config.begin() + 1, config.end());
    return out;
}

std::vector<Transition> transitions(const BpaSystem& system, std::span<const Var> config) {
    std::vector<Transition> out;
    if (config.empty()) {
        return out;
    }
    for (std::size_t ri : system.rules_of(config.front())) {
        const Rule& r = system.rules()[ri];
        out.push_back(Transition{r.label, apply_rule(config, r.body), ri});
    }
    return out;
}

ReachResult bounded_reach(const BpaSystem& system, std::span<const Var> config,
                          std::size_t max_len, std::size_t max_states) {
    ReachResult result;
    std::unordered_set<Configuration, ConfigurationHash> seen;
    std::deque<std::size_t> queue;
    Configuration start(config.begin(), config.end());
    seen.insert(start);
    result.states.push_back(std::move(start));
    queue.push_back(0);
    while (!queue.empty()) {
        const std::size_t idx = queue.front();
        queue.pop_front();
        const Configuration current = result.states[idx];
        for (auto& t : transitions(system, current)) {
            if (t.target.size() > max_len) {
                result.truncated = true;
                continue;
            }
            if (seen.count(t.target) != 0) {
                continue;
            }
            if (result.states.size() >= max_states) {
                result.truncated = true;
                continue;
            }
            seen.insert(t.target);
            queue.push_back(result.states.size());
            result.states.push_back(std::move(t.target));
        }
    }
    return result;
}

} // namespace nbpa
