#pragma once

#include "nbpa/grammar.hpp"

#include <span>
#include <vector>

namespace nbpa {

struct Transition {
    ActionId label = 0;
    Configuration target;
    std::size_t rule = 0; ///< index into BpaSystem::rules()

    friend bool operator==(const Transition&, const Transition&) = default;
};

/// body·tail for the configuration head·tail; rule order of the head.
std::vector<Transition> transitions(const BpaSystem& system, std::span<const Var> config);

/// Replaces the head of `config` by `body`.
Configuration apply_rule(std::span<const Var> config, std::span<const Var> body);

struct ReachResult {
    std::vector<Configuration> states; ///< breadth-first discovery order
    bool truncated = false;
};

/// Breadth-first closure under transitions, dropping configurations longer
/// than `max_len` and stopping once `max_states` are known.
ReachResult bounded_reach(const BpaSystem& system, std::span<const Var> config,
                          std::size_t max_len, std::size_t max_states);

struct ConfigurationHash {
    std::size_t operator()(const Configuration& c) const noexcept;
};

} // namespace nbpa
