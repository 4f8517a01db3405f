#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nbpa {

/// Index of a variable in its system's declaration order.
using Var = std::uint32_t;
/// Index of an action in its system's declaration order.
using ActionId = std::uint32_t;

/// A finite sequence of variables, leftmost symbol first.  The empty
/// configuration renders as ".".
using Configuration = std::vector<Var>;

using Norm = std::uint64_t;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& what);

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

struct Action {
    std::string name;
    bool silent = false;
};

struct Rule {
    Var head = 0;
    ActionId label = 0;
    Configuration body;

    friend bool operator==(const Rule&, const Rule&) = default;
};

/// A BPA system in Greibach normal form.  Variables and actions keep their
/// declaration order; rules keep file order.
class BpaSystem {
public:
    BpaSystem() = default;

    Var add_variable(const std::string& name);
    ActionId add_action(const std::string& name);
    void add_rule(Var head, ActionId label, Configuration body);

    std::size_t variable_count() const noexcept { return var_names_.size(); }
    std::size_t action_count() const noexcept { return actions_.size(); }

    const std::string& var_name(Var v) const { return var_names_.at(v); }
    const Action& action(ActionId a) const { return actions_.at(a); }
    bool is_silent(ActionId a) const { return actions_.at(a).silent; }

    std::optional<Var> find_variable(std::string_view name) const;
    std::optional<ActionId> find_action(std::string_view name) const;

    const std::vector<Rule>& rules() const noexcept { return rules_; }
    /// Indices into rules() of the rules whose head is `v`, in rule order.
    std::span<const std::size_t> rules_of(Var v) const { return rules_by_head_.at(v); }

    std::size_t max_body_length() const noexcept;

    friend bool operator==(const BpaSystem& a, const BpaSystem& b);

private:
    std::vector<std::string> var_names_;
    std::vector<Action> actions_;
    std::vector<Rule> rules_;
    std::vector<std::vector<std::size_t>> rules_by_head_;
    std::unordered_map<std::string, Var> var_index_;
    std::unordered_map<std::string, ActionId> action_index_;
};

BpaSystem parse_system(std::istream& in);
BpaSystem parse_system(std::string_view text);
BpaSystem load_system(const std::string& path);

/// Writes the line-oriented grammar format; parse_system reads it back into
/// an identical system.
std::string serialize_system(const BpaSystem& system);

/// Parses whitespace-separated variable names; "." (or blank) is ε.
Configuration parse_configuration(const BpaSystem& system, std::string_view text);
std::string render(const BpaSystem& system, std::span<const Var> config);

struct NormednessReport {
    bool normed = true;
    std::vector<Var> unnormed;
};

NormednessReport check_normed(const BpaSystem& system);

/// norm[v] = length of a shortest word rewriting v to ε.
class NormTable {
public:
    NormTable() = default;
    explicit NormTable(std::vector<Norm> values) : values_(std::move(values)) {}

    Norm operator[](Var v) const { return values_.at(v); }
    /// Sum over the symbols; throws Error on 64-bit overflow.
    Norm of(std::span<const Var> config) const;
    std::size_t size() const noexcept { return values_.size(); }
    const std::vector<Norm>& values() const noexcept { return values_; }

private:
    std::vector<Norm> values_;
};

/// Throws Error if the system is not normed or a norm overflows 64 bits.
NormTable compute_norms(const BpaSystem& system);

/// Variables from which no visible action is ever reachable.
std::vector<Var> detect_silent_variables(const BpaSystem& system);

/// Result of removing silent variables: the reduced system plus the map
/// from original variable indices (nullopt for erased ones).
struct SilentElimination {
    BpaSystem system;
    std::vector<std::optional<Var>> var_map;

    /// Rewrites a configuration of the original system by erasing silent
    /// variables.
    Configuration translate(std::span<const Var> config) const;
};

SilentElimination eliminate_silent_variables(const BpaSystem& system);

/// The subsystem over the variables reachable (through rule bodies) from
/// `roots`, with the same actions.  Configurations over those variables
/// have the same behaviour in both systems.
struct Restriction {
    BpaSystem system;
    std::vector<std::optional<Var>> var_map;

    Configuration translate(std::span<const Var> config) const;
};

Restriction restrict_to(const BpaSystem& system, std::span<const Var> roots);

/// Restriction onto an explicit variable set (which must be closed under
/// rule bodies); throws Error otherwise.
Restriction restrict_to_names(const BpaSystem& system, std::span<const std::string> names);

} // namespace nbpa
