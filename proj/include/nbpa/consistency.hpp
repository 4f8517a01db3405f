#pragma once

#include "nbpa/base.hpp"

#include <json.hpp>

#include <cstddef>
#include <string>
#include <vector>

namespace nbpa {

struct Outcome {
    ActionId label = 0;
    Configuration image;

    friend bool operator==(const Outcome&, const Outcome&) = default;
    friend auto operator<=>(const Outcome&, const Outcome&) = default;
};

enum class ClosureMode : std::uint8_t {
    /// Explicit τ-closure over configurations, truncated at the caps.
    Capped,
    /// Closure summarized over (variable, context) heads; needs no caps.
    Summary,
};

struct ClosureCaps {
    std::size_t len_cap = 0; ///< 0: |seed| + |V|·(longest rule body)
    std::size_t size_cap = 100000;
    ClosureMode mode = ClosureMode::Capped;
};

struct ClosureResult {
    std::vector<Configuration> members; ///< discovery order, seed first
    bool truncated = false;
};

struct LegalMoves {
    std::vector<Outcome> outcomes; ///< sorted, duplicate-free
    bool truncated = false;
};

/// The in-class τ-closure of `seed` relative to context `ctx`.  Always the
/// explicit (capped) construction, whatever caps.mode says.
ClosureResult tau_closure(const BpaSystem& system, const BaseView& base, ContextId ctx,
                          std::span<const Var> seed, const ClosureCaps& caps = {});

LegalMoves legal_moves(const BpaSystem& system, const BaseView& base, ContextId ctx,
                       std::span<const Var> config, const ClosureCaps& caps = {});

enum class PairVerdict : std::uint8_t { Consistent, Inconsistent, Indeterminate };

const char* to_string(PairVerdict v) noexcept;

struct PairReport {
    PairVerdict verdict = PairVerdict::Consistent;
    std::vector<Outcome> missing; ///< outcomes of the variable absent on the other side
    std::vector<Outcome> extra;   ///< outcomes of the other side absent for the variable
    bool pd_differs = false;
    bool left_truncated = false;
    bool right_truncated = false;
};

PairReport consistent_pair(const BpaSystem& system, const BaseView& base, ContextId ctx, Var var,
                           std::span<const Var> body, const ClosureCaps& caps = {});

struct TripleReport {
    bool propagation = false; ///< (B, XB, R) rather than (A, α, R)
    Var var = 0;
    Configuration body;
    ContextId context = 0;
    PairReport pair;
};

struct ConsistencyReport {
    PairVerdict verdict = PairVerdict::Consistent;
    std::size_t checked = 0;
    /// Triples whose verdict is not Consistent.
    std::vector<TripleReport> failures;
};

/// Checks every decomposition and propagation triple of the base.  One
/// inconsistent triple makes the verdict Inconsistent; otherwise any
/// truncation makes it Indeterminate.
ConsistencyReport check_consistency(const BpaSystem& system, const Base& base,
                                    const ClosureCaps& caps = {});

std::string render_outcome(const BpaSystem& system, const Outcome& o);
std::string render_report(const BpaSystem& system, const Base& base,
                          const ConsistencyReport& report);
nlohmann::json report_to_json(const BpaSystem& system, const Base& base,
                              const ConsistencyReport& report);

} // namespace nbpa
