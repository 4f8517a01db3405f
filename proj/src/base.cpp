#include "nbpa/base.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace nbpa {

namespace {

// Images longer than this are treated as a runaway evaluation.
constexpr std::size_t kImageCap = std::size_t{1} << 20;

enum : std::uint8_t { kFresh = 0, kActive = 1, kDone = 2 };

std::string pd_failure_message(PdStatus status) {
    return std::string("prime decomposition failed: ") + to_string(status);
}

} // namespace

const char* to_string(PdStatus status) noexcept {
    switch (status) {
    case PdStatus::Ok:
        return "ok";
    case PdStatus::ContextNotInDomain:
        return "context not in domain";
    case PdStatus::BudgetExceeded:
        return "decomposition diverges";
    case PdStatus::MissingDecomposition:
        return "missing decomposition";
    }
    return "?";
}

PdOutcome evaluate_pd(const BaseView& base, ContextId ctx, std::span<const Var> config,
                      std::uint64_t budget) {
    PdOutcome out;
    out.context = ctx;
    // Built reversed: each processed symbol contributes a suffix of the result.
    Configuration reversed;
    for (auto it = config.rbegin(); it != config.rend(); ++it) {
        const Unit& u = base.unit(out.context, *it);
        if (u.status != PdStatus::Ok) {
            out.status = u.status;
            return out;
        }
        out.subs += u.subs;
        if (out.subs > budget) {
            out.status = PdStatus::BudgetExceeded;
            return out;
        }
        if (reversed.size() + u.image.size() > kImageCap) {
            out.status = PdStatus::BudgetExceeded;
            return out;
        }
        reversed.insert(reversed.end(), u.image.rbegin(), u.image.rend());
        out.context = u.out;
    }
    out.image.assign(reversed.rbegin(), reversed.rend());
    return out;
}

Configuration pd_image(const BaseView& base, ContextId ctx, std::span<const Var> config) {
    PdOutcome r = evaluate_pd(base, ctx, config);
    if (!r.ok()) {
        throw PdError(r.status, pd_failure_message(r.status));
    }
    return std::move(r.image);
}

ContextId red_context(const BaseView& base, ContextId ctx, std::span<const Var> config) {
    ContextId cur = ctx;
    for (auto it = config.rbegin(); it != config.rend(); ++it) {
        const Unit& u = base.unit(cur, *it);
        if (u.status != PdStatus::Ok) {
            throw PdError(u.status, pd_failure_message(u.status));
        }
        cur = u.out;
    }
    return cur;
}

Configuration rff_image(const BaseView& base, ContextId ctx, std::span<const Var> config) {
    Configuration reversed;
    ContextId cur = ctx;
    for (auto it = config.rbegin(); it != config.rend(); ++it) {
        if (base.context(cur).contains(*it)) {
            continue;
        }
        const Unit& u = base.unit(cur, *it);
        if (u.status != PdStatus::Ok) {
            throw PdError(u.status, pd_failure_message(u.status));
        }
        reversed.push_back(*it);
        cur = u.out;
    }
    return Configuration(reversed.rbegin(), reversed.rend());
}

Base::Base(std::size_t variable_count, NormTable norms, PreBase source)
    : nvars_(variable_count), norms_(std::move(norms)), source_(std::move(source)) {
    std::unordered_map<ContextSet, ContextId, ContextSetHash> index;
    for (const ContextSet& r : source_.domain) {
        if (r.universe() != nvars_ || index.count(r) != 0) {
            continue;
        }
        index.emplace(r, static_cast<ContextId>(contexts_.size()));
        contexts_.push_back(r);
    }
    entries_.assign(contexts_.size(), std::vector<Entry>(nvars_));
    for (ContextId c = 0; c < contexts_.size(); ++c) {
        for (Var x : contexts_[c].members()) {
            entries_[c][x].role = Role::InContext;
        }
    }
    auto lookup = [&](const ContextSet& r) -> Entry* {
        auto it = index.find(r);
        return it == index.end() ? nullptr : entries_[it->second].data();
    };
    for (const auto& [r, primes] : source_.primes) {
        Entry* row = lookup(r);
        if (row == nullptr) {
            continue;
        }
        for (Var b : primes) {
            if (b < nvars_ && row[b].role == Role::Missing) {
                row[b].role = Role::Prime;
                row[b].red = ContextSet(nvars_);
            }
        }
    }
    for (const DecTriple& d : source_.dec) {
        Entry* row = lookup(d.context);
        if (row == nullptr || d.var >= nvars_ || row[d.var].role != Role::Missing) {
            continue;
        }
        row[d.var].role = Role::NonPrime;
        row[d.var].body = d.body;
    }
    for (const PropTriple& p : source_.prop) {
        Entry* row = lookup(p.context);
        if (row == nullptr || p.prime >= nvars_ || p.redundant >= nvars_ ||
            row[p.prime].role != Role::Prime) {
            continue;
        }
        row[p.prime].red.insert(p.redundant);
    }
    compute_units();
}

std::optional<ContextId> Base::find_context(const ContextSet& s) const {
    for (ContextId c = 0; c < contexts_.size(); ++c) {
        if (contexts_[c] == s) {
            return c;
        }
    }
    return std::nullopt;
}

std::uint64_t Base::budget_for(std::span<const Var> config) const {
    std::uint64_t total = 1;
    for (Var v : config) {
        const Norm n = norms_[v];
        if (total > kNoBudget - n) {
            return kNoBudget;
        }
        total += n;
    }
    return total;
}

PdOutcome Base::pd(const ContextSet& ctx, std::span<const Var> config) const {
    const auto c = find_context(ctx);
    if (!c) {
        PdOutcome out;
        out.status = PdStatus::ContextNotInDomain;
        return out;
    }
    return evaluate_pd(*this, *c, config);
}

void Base::compute_units() {
    units_.assign(contexts_.size(), std::vector<Unit>(nvars_));
    std::vector<std::vector<std::uint8_t>> state(contexts_.size(),
                                                 std::vector<std::uint8_t>(nvars_, kFresh));
    for (ContextId c = 0; c < contexts_.size(); ++c) {
        for (Var x = 0; x < nvars_; ++x) {
            compute_unit(c, x, state);
        }
    }
}

void Base::compute_unit(ContextId c, Var x, std::vector<std::vector<std::uint8_t>>& state) {
    if (state[c][x] == kDone) {
        return;
    }
    Unit& u = units_[c][x];
    if (state[c][x] == kActive) {
        // Re-entered while expanding its own decomposition.
        u.status = PdStatus::BudgetExceeded;
        return;
    }
    const Entry& e = entries_[c][x];
    switch (e.role) {
    case Role::InContext:
        u.out = c;
        state[c][x] = kDone;
        return;
    case Role::Missing:
        u.status = PdStatus::MissingDecomposition;
        state[c][x] = kDone;
        return;
    case Role::Prime: {
        u.image = {x};
        const auto target = find_context(e.red);
        if (!target) {
            u.status = PdStatus::ContextNotInDomain;
        } else {
            u.out = *target;
        }
        state[c][x] = kDone;
        return;
    }
    case Role::NonPrime:
        break;
    }
    state[c][x] = kActive;
    Configuration reversed;
    ContextId cur = c;
    std::uint64_t subs = 1;
    PdStatus status = PdStatus::Ok;
    for (auto it = e.body.rbegin(); it != e.body.rend(); ++it) {
        if (*it >= nvars_) {
            status = PdStatus::MissingDecomposition;
            break;
        }
        compute_unit(cur, *it, state);
        const Unit& sub = units_[cur][*it];
        // A cycle leaves the re-entered unit marked but not yet finished.
        if (state[cur][*it] == kActive || sub.status != PdStatus::Ok) {
            status = state[cur][*it] == kActive ? PdStatus::BudgetExceeded : sub.status;
            break;
        }
        if (reversed.size() + sub.image.size() > kImageCap) {
            status = PdStatus::BudgetExceeded;
            break;
        }
        subs = subs > kNoBudget - sub.subs ? kNoBudget : subs + sub.subs;
        reversed.insert(reversed.end(), sub.image.rbegin(), sub.image.rend());
        cur = sub.out;
    }
    Unit& mine = units_[c][x];
    mine.status = status;
    if (status == PdStatus::Ok) {
        mine.image.assign(reversed.rbegin(), reversed.rend());
        mine.out = cur;
        mine.subs = subs;
    } else {
        mine.image.clear();
    }
    state[c][x] = kDone;
}

namespace {

ContextId require_context(const Base& base, const ContextSet& ctx) {
    const auto c = base.find_context(ctx);
    if (!c) {
        throw PdError(PdStatus::ContextNotInDomain, pd_failure_message(PdStatus::ContextNotInDomain));
    }
    return *c;
}

} // namespace

Configuration pd(const Base& base, const ContextSet& ctx, std::span<const Var> config) {
    return pd_image(base, require_context(base, ctx), config);
}

ContextSet red_of(const Base& base, const ContextSet& ctx, std::span<const Var> config) {
    return base.context(red_context(base, require_context(base, ctx), config));
}

Configuration rff(const Base& base, const ContextSet& ctx, std::span<const Var> config) {
    return rff_image(base, require_context(base, ctx), config);
}

Diagnostics check_pre_base(const BpaSystem& system, const PreBase& candidate) {
    Diagnostics out;
    const std::size_t n = system.variable_count();
    auto report = [&](const char* condition, std::string message) {
        out.push_back(Diagnostic{condition, std::move(message)});
    };
    auto name = [&](Var v) { return v < n ? system.var_name(v) : "#" + std::to_string(v); };

    std::unordered_set<ContextSet, ContextSetHash> domain;
    for (const ContextSet& r : candidate.domain) {
        if (r.universe() != n) {
            report("domain", "context over a different variable set");
            continue;
        }
        if (!domain.insert(r).second) {
            report("domain", "duplicate domain entry " + r.str(system));
        }
    }
    if (domain.count(ContextSet(n)) == 0) {
        report("domain", "empty context missing from domain");
    }

    // Per context: prime flags, decomposition counts, red sets.
    struct Row {
        std::vector<std::uint8_t> prime;
        std::vector<std::uint32_t> decs;
        std::vector<ContextSet> red;
    };
    std::unordered_map<ContextSet, Row, ContextSetHash> rows;
    for (const ContextSet& r : domain) {
        rows.emplace(r, Row{std::vector<std::uint8_t>(n, 0), std::vector<std::uint32_t>(n, 0),
                            std::vector<ContextSet>(n, ContextSet(n))});
    }

    for (const auto& [r, primes] : candidate.primes) {
        auto it = rows.find(r);
        if (it == rows.end()) {
            report("primes", "primes listed for " + r.str(system) + " which is not in the domain");
            continue;
        }
        for (Var b : primes) {
            if (b >= n) {
                report("primes", "unknown prime variable");
                continue;
            }
            if (r.contains(b)) {
                report("partition", name(b) + " is listed as prime in " + r.str(system) +
                                         " but belongs to it");
                continue;
            }
            if (it->second.prime[b] != 0) {
                report("primes", name(b) + " listed twice as prime in " + r.str(system));
            }
            it->second.prime[b] = 1;
        }
    }

    for (const DecTriple& d : candidate.dec) {
        auto it = rows.find(d.context);
        if (it == rows.end()) {
            report("triples", "decomposition of " + name(d.var) + " in " + d.context.str(system) +
                                  " refers to a context outside the domain");
            continue;
        }
        if (d.var >= n) {
            report("triples", "decomposition of an unknown variable");
            continue;
        }
        Row& row = it->second;
        const std::string where = name(d.var) + " in " + d.context.str(system);
        if (d.context.contains(d.var)) {
            report("partition", "decomposition given for " + where + ", a member of the context");
        } else if (row.prime[d.var] != 0) {
            report("partition", where + " is both prime and decomposed");
        }
        ++row.decs[d.var];
        if (d.body.empty()) {
            report("triples", "empty decomposition body for " + where);
        } else if (d.body.back() >= n || row.prime[d.body.back()] == 0) {
            report("triples", "decomposition body of " + where + " does not end in a prime");
        }
        if (std::any_of(d.body.begin(), d.body.end(), [&](Var v) { return v >= n; })) {
            report("triples", "decomposition body of " + where + " has unknown variables");
        }
    }

    for (auto& [r, row] : rows) {
        for (Var x = 0; x < n; ++x) {
            if (r.contains(x)) {
                continue;
            }
            const std::string where = name(x) + " in " + r.str(system);
            if (row.decs[x] > 1) {
                report("partition", "several decompositions for " + where);
            }
            if (row.prime[x] == 0 && row.decs[x] == 0) {
                report("partition", where + " is neither prime nor decomposed");
            }
        }
    }

    for (const PropTriple& p : candidate.prop) {
        auto it = rows.find(p.context);
        if (it == rows.end()) {
            report("triples", "propagation for " + name(p.prime) + " in " + p.context.str(system) +
                                  " refers to a context outside the domain");
            continue;
        }
        if (p.prime >= n || p.redundant >= n) {
            report("triples", "propagation with an unknown variable");
            continue;
        }
        if (it->second.prime[p.prime] == 0) {
            report("triples", "propagation for " + name(p.prime) + " in " + p.context.str(system) +
                                  ", which is not prime there");
            continue;
        }
        it->second.red[p.prime].insert(p.redundant);
    }

    // Least propagation-closed set containing the empty context.
    std::unordered_set<ContextSet, ContextSetHash> closure;
    std::deque<ContextSet> queue;
    closure.insert(ContextSet(n));
    queue.push_back(ContextSet(n));
    while (!queue.empty()) {
        ContextSet r = std::move(queue.front());
        queue.pop_front();
        auto it = rows.find(r);
        if (it == rows.end()) {
            continue;
        }
        for (Var b = 0; b < n; ++b) {
            if (it->second.prime[b] == 0) {
                continue;
            }
            const ContextSet& target = it->second.red[b];
            if (closure.insert(target).second) {
                if (domain.count(target) == 0) {
                    report("domain", "domain not propagation-closed: " + target.str(system) +
                                         " (from " + name(b) + " in " + r.str(system) +
                                         ") is missing");
                }
                queue.push_back(target);
            }
        }
    }
    for (const ContextSet& r : domain) {
        if (closure.count(r) == 0) {
            report("domain", "domain entry " + r.str(system) + " is not reachable by propagation");
        }
    }
    return out;
}

Diagnostics check_base(const BpaSystem& system, const Base& candidate) {
    Diagnostics out;
    const std::size_t n = candidate.variable_count();
    for (ContextId c = 0; c < candidate.context_count(); ++c) {
        const ContextSet& r = candidate.context(c);
        for (Var x = 0; x < n; ++x) {
            const Unit& u = candidate.unit(c, x);
            const std::string where = system.var_name(x) + " in " + r.str(system);
            if (u.status != PdStatus::Ok) {
                out.push_back({"bounded", std::string("decomposition of ") + where + ": " +
                                              to_string(u.status)});
            } else if (u.image.size() > candidate.norms()[x]) {
                out.push_back({"bounded", "decomposition of " + where + " has length " +
                                              std::to_string(u.image.size()) +
                                              ", above the norm " +
                                              std::to_string(candidate.norms()[x])});
            }
        }
    }
    for (const DecTriple& d : candidate.source().dec) {
        const auto c = candidate.find_context(d.context);
        if (!c) {
            continue;
        }
        const std::string where = system.var_name(d.var) + " in " + d.context.str(system);
        const PdOutcome r = evaluate_pd(candidate, *c, d.body);
        if (!r.ok()) {
            out.push_back({"fixed-point",
                           "body of " + where + " cannot be decomposed: " + to_string(r.status)});
        } else if (r.image != d.body) {
            out.push_back({"fixed-point", "body " + render(system, d.body) + " of " + where +
                                              " decomposes further to " +
                                              render(system, r.image)});
        }
    }
    return out;
}

std::string render_diagnostics(const Diagnostics& diagnostics) {
    std::ostringstream os;
    for (const Diagnostic& d : diagnostics) {
        os << d.condition << ": " << d.message << '\n';
    }
    return os.str();
}

} // namespace nbpa
