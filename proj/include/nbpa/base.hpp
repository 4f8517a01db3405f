#pragma once

#include "nbpa/context_set.hpp"
#include "nbpa/grammar.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nbpa {

/// (A, α, R): A is a non-prime in context R and PD_R(A) = α.
struct DecTriple {
    Var var = 0;
    Configuration body;
    ContextSet context;
};

/// (B, XB, R): B is an R-prime and X ∈ red(B, R).
struct PropTriple {
    Var prime = 0;
    Var redundant = 0;
    ContextSet context;
};

/// The raw guessed structure, exactly as written in a certificate file.  It
/// may violate any of the well-formedness conditions; check_pre_base says
/// which.
struct PreBase {
    std::vector<ContextSet> domain;
    std::vector<std::pair<ContextSet, std::vector<Var>>> primes;
    std::vector<DecTriple> dec;
    std::vector<PropTriple> prop;
};

using ContextId = std::uint32_t;

enum class Role : std::uint8_t { InContext, Prime, NonPrime, Missing };

enum class PdStatus : std::uint8_t {
    Ok,
    ContextNotInDomain,
    BudgetExceeded,
    MissingDecomposition,
};

const char* to_string(PdStatus status) noexcept;

/// PD^B_R(X), red^B(X, R) and the number of decomposition substitutions
/// performed to get there.
struct Unit {
    PdStatus status = PdStatus::Ok;
    Configuration image;
    ContextId out = 0;
    std::uint64_t subs = 0;
};

/// Read access to a base, possibly one still under construction (in which
/// case unit() may throw to signal a missing decision).
class BaseView {
public:
    virtual ~BaseView() = default;

    virtual std::size_t variable_count() const = 0;
    virtual std::size_t context_count() const = 0;
    virtual const ContextSet& context(ContextId c) const = 0;
    virtual std::optional<ContextId> find_context(const ContextSet& s) const = 0;
    virtual const Unit& unit(ContextId c, Var x) const = 0;
};

inline constexpr std::uint64_t kNoBudget = std::numeric_limits<std::uint64_t>::max();

struct PdOutcome {
    PdStatus status = PdStatus::Ok;
    Configuration image;    ///< PD^B_R(config)
    ContextId context = 0;  ///< red^B(config, R)
    std::uint64_t subs = 0;

    bool ok() const noexcept { return status == PdStatus::Ok; }
};

/// Right-to-left evaluation of PD^B_R(config) together with red^B(config, R).
PdOutcome evaluate_pd(const BaseView& base, ContextId ctx, std::span<const Var> config,
                      std::uint64_t budget = kNoBudget);

/// Throws PdError unless evaluation succeeds.
Configuration pd_image(const BaseView& base, ContextId ctx, std::span<const Var> config);
ContextId red_context(const BaseView& base, ContextId ctx, std::span<const Var> config);
Configuration rff_image(const BaseView& base, ContextId ctx, std::span<const Var> config);

class PdError : public Error {
public:
    PdError(PdStatus status, const std::string& what) : Error(what), status_(status) {}
    PdStatus status() const noexcept { return status_; }

private:
    PdStatus status_;
};

/// A pre-base indexed for evaluation.  Construction never fails: missing or
/// conflicting data surfaces as unit statuses, and check_pre_base /
/// check_base report the violated conditions.
class Base final : public BaseView {
public:
    Base(std::size_t variable_count, NormTable norms, PreBase source);

    std::size_t variable_count() const override { return nvars_; }
    std::size_t context_count() const override { return contexts_.size(); }
    const ContextSet& context(ContextId c) const override { return contexts_.at(c); }
    std::optional<ContextId> find_context(const ContextSet& s) const override;
    const Unit& unit(ContextId c, Var x) const override { return units_.at(c).at(x); }

    Role role(ContextId c, Var x) const { return entries_.at(c).at(x).role; }
    /// red^B(B, R) as listed by the propagation triples.
    const ContextSet& red_set(ContextId c, Var prime) const { return entries_.at(c).at(prime).red; }
    const Configuration& body(ContextId c, Var x) const { return entries_.at(c).at(x).body; }

    const NormTable& norms() const noexcept { return norms_; }
    const PreBase& source() const noexcept { return source_; }

    /// Σ‖symbol‖ + 1, the substitution budget of evaluate_pd.
    std::uint64_t budget_for(std::span<const Var> config) const;

    /// Budgeted evaluation against a context set (not necessarily in the
    /// domain, which yields ContextNotInDomain).
    PdOutcome pd(const ContextSet& ctx, std::span<const Var> config) const;

private:
    struct Entry {
        Role role = Role::Missing;
        ContextSet red;
        Configuration body;
    };

    void compute_units();
    void compute_unit(ContextId c, Var x, std::vector<std::vector<std::uint8_t>>& state);

    std::size_t nvars_;
    NormTable norms_;
    PreBase source_;
    std::vector<ContextSet> contexts_;
    std::vector<std::vector<Entry>> entries_;
    std::vector<std::vector<Unit>> units_;
};

Configuration pd(const Base& base, const ContextSet& ctx, std::span<const Var> config);
ContextSet red_of(const Base& base, const ContextSet& ctx, std::span<const Var> config);
Configuration rff(const Base& base, const ContextSet& ctx, std::span<const Var> config);

struct Diagnostic {
    std::string condition;
    std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

/// Partition per context, triple shapes, uniqueness, and propagation
/// closure of the domain.
Diagnostics check_pre_base(const BpaSystem& system, const PreBase& candidate);

/// |PD_R(A)| ≤ ‖A‖ for all A and R in the domain, and every decomposition
/// body is its own PD image.  Assumes check_pre_base passed.
Diagnostics check_base(const BpaSystem& system, const Base& candidate);

std::string render_diagnostics(const Diagnostics& diagnostics);

} // namespace nbpa
