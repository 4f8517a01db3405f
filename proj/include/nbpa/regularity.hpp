#pragma once

#include "nbpa/search.hpp"

#include <json.hpp>

#include <optional>
#include <vector>

namespace nbpa {

/// Vertex (x, c) of the graph is numbered c·|V| + x.
struct PdArc {
    std::uint32_t to = 0;
    bool blue = false;
    /// One rule split realizing the arc: rule index and the suffix γ2
    /// following the middle symbol.
    std::size_t rule = 0;
    Configuration suffix;
};

struct PdGraph {
    std::size_t variables = 0;
    std::size_t contexts = 0;
    std::vector<std::vector<PdArc>> arcs;

    std::uint32_t vertex(ContextId c, Var x) const { return static_cast<std::uint32_t>(c * variables + x); }
    ContextId context_of(std::uint32_t v) const { return static_cast<ContextId>(v / variables); }
    Var var_of(std::uint32_t v) const { return static_cast<Var>(v % variables); }
};

/// pre: base passed check_pre_base and check_base.
PdGraph build_pd_graph(const BpaSystem& system, const Base& base);

/// Membership flags per vertex.
std::vector<bool> pd_loops(const PdGraph& graph);
std::vector<bool> pd_infinite(const PdGraph& graph);

struct LoopWitness {
    Var variable = 0;
    ContextSet context;         ///< red(γ, ∅) for δ = variable·γ
    Configuration reachable;    ///< δ, reachable from the configuration
};

/// A configuration reachable from `config` whose head and redundancy set
/// form a PD-loop, if there is one.
std::optional<LoopWitness> find_pd_loop(const BpaSystem& system, const Base& base,
                                        std::span<const Var> config);

bool reaches_pd_loop(const BpaSystem& system, const Base& base, std::span<const Var> config);

enum class PdReach : std::uint8_t { Finite, ImageCutoff, StateCutoff };

const char* to_string(PdReach r) noexcept;

struct PdReachResult {
    PdReach result = PdReach::Finite;
    std::size_t images = 0;
    std::size_t states = 0;
};

/// Breadth-first search of the configurations reachable from `config`,
/// collecting their decompositions PD_∅.  Finite means the search ran out
/// of configurations; either cutoff leaves the question open.
PdReachResult pdreach(const BpaSystem& system, const Base& base, std::span<const Var> config,
                      std::size_t image_cutoff = 10'000, std::size_t state_cutoff = 100'000);

enum class Regularity : std::uint8_t { Regular, Irregular, Unknown };

const char* to_string(Regularity r) noexcept;

struct RegularityVerdict {
    Regularity status = Regularity::Unknown;
    BpaSystem system; ///< restricted to the variables reachable from the query
    Configuration config;
    std::optional<PreBase> certificate;
    std::optional<LoopWitness> witness;
    std::optional<PdReachResult> cross_check; ///< on the certificate
    std::string evidence;
    std::string route;
    SearchStats stats;
};

/// pre: `system` normed and silent-free.
RegularityVerdict decide_regularity(const BpaSystem& system, std::span<const Var> config,
                                    const DecideParams& params = {});

nlohmann::json regularity_to_json(const RegularityVerdict& verdict);

} // namespace nbpa
