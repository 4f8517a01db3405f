#pragma once

#include "nbpa/base.hpp"
#include "nbpa/consistency.hpp"
#include "nbpa/oracle.hpp"
#include "nbpa/propose.hpp"

#include <json.hpp>

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace nbpa {

struct SearchBounds {
    std::uint64_t max_nodes = 2'000'000;
    std::chrono::milliseconds time_limit{600'000};
    /// Longest decomposition body tried for A; the norm bound ‖A‖ is
    /// used when this is 0 or larger.
    std::size_t max_body = 0;
    std::size_t max_contexts = 4096;
    ClosureCaps caps;
    unsigned jobs = 1;
};

struct SearchStats {
    std::uint64_t nodes = 0;
    std::uint64_t backjumps = 0;
    std::size_t max_contexts = 0;
    std::uint64_t indeterminate = 0; ///< consistency checks cut short by caps
    bool budget_exhausted = false;
    bool body_bound_reduced = false;
    double seconds = 0;
};

/// What a base must achieve besides being a consistent base.
struct SearchProblem {
    /// pd(∅, first) = pd(∅, second) for each pair; checked as early as the
    /// partial base allows.
    std::vector<std::pair<Configuration, Configuration>> goals;
    /// Checked on each complete candidate; rejects it when false.
    std::function<bool(const PreBase&)> accept;
    /// Choices tried first, per (context, variable).
    std::optional<PreBase> hint;
    /// Explore only the hint's choices (a membership test for the hint).
    bool hint_only = false;
};

struct SearchOutcome {
    std::optional<PreBase> base;
    /// True when the whole bounded space was covered with every consistency
    /// check decided: then no base exists if none was found.
    bool complete = false;
    SearchStats stats;
};

/// Backtracking over partial bases.  Decisions are demanded lazily by the
/// goals and the consistency checks; any returned base has passed every
/// check of check_pre_base, check_base and check_consistency under the
/// given caps.
SearchOutcome search_bases(const BpaSystem& system, const NormTable& norms,
                           const SearchProblem& problem, const SearchBounds& bounds = {});

/// True when search_bases, restricted to the choices of `base`, produces
/// it: the base lies in the enumerated space.
bool in_search_space(const BpaSystem& system, const NormTable& norms, const PreBase& base,
                     const SearchBounds& bounds = {});

enum class Strategy : std::uint8_t { Guided, Exhaustive, Auto };

Strategy parse_strategy(const std::string& name);
const char* to_string(Strategy s) noexcept;

enum class Status : std::uint8_t { Equivalent, Inequivalent, Unknown };

const char* to_string(Status s) noexcept;

/// Everything a certificate is checked against.
struct CertificateCheck {
    bool ok = false;
    std::string failure;
};

CertificateCheck verify_certificate(const BpaSystem& system, const NormTable& norms,
                                    const PreBase& base, const ClosureCaps& caps,
                                    const std::vector<std::pair<Configuration, Configuration>>& goals);

struct Verdict {
    Status status = Status::Unknown;
    /// The system the certificate refers to: the input restricted to the
    /// variables reachable from the query.
    BpaSystem system;
    std::optional<PreBase> certificate;
    std::string evidence;
    std::optional<Refutation> refutation;
    std::string route; ///< which strategy produced the verdict
    SearchStats stats;
};

struct DecideParams {
    Strategy strategy = Strategy::Auto;
    SearchBounds bounds;
    ProposeParams propose;
    /// Under Auto, an oracle refutation (replayed on the system) may settle
    /// an inequivalence the search left open.
    bool oracle_refutation = true;
};

/// pre: `system` normed and silent-free.
Verdict decide_equivalence(const BpaSystem& system, std::span<const Var> left,
                           std::span<const Var> right, const DecideParams& params = {});

/// Certificate payload plus the subsystem's variable names.
nlohmann::json certificate_to_json(const BpaSystem& system, const PreBase& base);
nlohmann::json verdict_to_json(const Verdict& verdict, const DecideParams& params);

} // namespace nbpa
