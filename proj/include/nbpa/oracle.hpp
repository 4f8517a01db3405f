#pragma once

#include "nbpa/context_set.hpp"
#include "nbpa/grammar.hpp"
#include "nbpa/semantics.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace nbpa {

using StateId = std::uint32_t;

inline constexpr ActionId kNoTau = static_cast<ActionId>(-1);

struct LtsEdge {
    ActionId label = 0;
    StateId target = 0;
};

struct FiniteLts {
    std::vector<std::vector<LtsEdge>> succ;
    ActionId tau = kNoTau;

    std::size_t size() const noexcept { return succ.size(); }
    StateId add_state();
    void add_edge(StateId from, ActionId label, StateId to);
};

/// Block index per state for the coarsest branching bisimulation.  Blocks
/// are numbered in order of their least state.
std::vector<std::uint32_t> finite_branching_quotient(const FiniteLts& lts);

struct OracleParams {
    std::size_t depth = 8;     ///< refutation rounds
    std::size_t len_cap = 8;   ///< longest configuration explored
    std::size_t tau_cap = 8;   ///< longest τ-path searched for a response
    std::size_t state_cap = 20000;
    std::size_t pair_cap = 200000;
};

enum class Tri : std::uint8_t { Yes, No, Unknown };

const char* to_string(Tri t) noexcept;

/// One refuted pair: `attacker` moves `label` to `target`, and no response
/// of `defender` within the pairs not yet refuted reaches a state that is
/// not already refuted against `target`.
struct RefutationStep {
    Configuration attacker;
    Configuration defender;
    ActionId label = 0;
    Configuration target;
    std::size_t round = 0;
    /// Defender moves with the same label, as (from, to).
    std::vector<std::pair<Configuration, Configuration>> responses;
};

/// Steps in dependency order: every pair a step relies on as refuted
/// appears earlier.  The last step refutes the queried pair.
struct Refutation {
    std::vector<RefutationStep> steps;
};

struct OracleAnswer {
    Tri value = Tri::Unknown;
    std::optional<Refutation> refutation;
    std::size_t states = 0;
    std::size_t tainted = 0;
    std::size_t pairs = 0;
    std::size_t rounds = 0;
};

/// The truncated configuration graph reachable from a set of roots, with
/// its taint-aware quotient.  Several queries can share one session.
class OracleSession {
public:
    OracleSession(const BpaSystem& system, const std::vector<Configuration>& roots,
                  OracleParams params = {});

    /// Sound positive: both configurations are explored and share a block
    /// of the quotient in which tainted states keep unique labels.
    bool same_class(std::span<const Var> a, std::span<const Var> b) const;

    std::optional<StateId> state_of(std::span<const Var> config) const;
    const Configuration& config_of(StateId s) const { return states_.at(s); }
    std::uint32_t block_of(StateId s) const { return block_.at(s); }
    bool tainted(StateId s) const { return tainted_.at(s) != 0; }
    std::size_t size() const noexcept { return states_.size(); }
    std::size_t tainted_count() const noexcept;
    const FiniteLts& lts() const noexcept { return lts_; }

    /// Least number of block changes on an explored path from `from` to
    /// `to`; nullopt when no explored path exists.
    std::optional<std::uint64_t> class_changes(std::span<const Var> from,
                                               std::span<const Var> to) const;

    OracleAnswer check(std::span<const Var> left, std::span<const Var> right) const;

private:
    bool refute(StateId a, StateId b, Refutation& out, OracleAnswer& stats) const;

    const BpaSystem& system_;
    OracleParams params_;
    std::vector<Configuration> states_;
    std::unordered_map<Configuration, StateId, ConfigurationHash> index_;
    std::vector<std::uint8_t> tainted_;
    FiniteLts lts_;
    std::vector<std::uint32_t> block_;
};

OracleAnswer approximant_check(const BpaSystem& system, std::span<const Var> left,
                               std::span<const Var> right, const OracleParams& params = {});

/// {X | Xγ and γ are found equivalent}.  Advisory only.
ContextSet estimate_red(const BpaSystem& system, std::span<const Var> gamma,
                        const OracleParams& params = {});

/// Re-checks every step against the system's own transition relation: the
/// attack exists, and every response reachable through pairs not refuted
/// earlier (τ-paths of at most tau_cap steps) lands in an earlier-refuted
/// pair.  Returns false on any gap.
bool verify_refutation(const BpaSystem& system, const Refutation& refutation,
                       std::size_t tau_cap);

std::string render_refutation(const BpaSystem& system, const Refutation& refutation);
nlohmann::json refutation_to_json(const BpaSystem& system, const Refutation& refutation);

} // namespace nbpa
