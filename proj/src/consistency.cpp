#include "nbpa/consistency.hpp"

#include "nbpa/base_io.hpp"
#include "nbpa/semantics.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace nbpa {

namespace {

std::size_t default_len_cap(const BpaSystem& system, std::size_t seed_len) {
    return seed_len + system.variable_count() * std::max<std::size_t>(system.max_body_length(), 1);
}

Configuration concat(std::span<const Var> a, std::span<const Var> b) {
    Configuration out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

// Index one past the rightmost symbol of `body` outside `ctx`; 0 if none.
std::size_t class_carrier_end(const ContextSet& ctx, std::span<const Var> body) {
    std::size_t k = body.size();
    while (k > 0 && ctx.contains(body[k - 1])) {
        --k;
    }
    return k;
}

void normalize(std::vector<Outcome>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Legal moves via the closure summarized over annotated heads (Y, C), where
// C is red^B of everything below Y.  Heads range over V × domain, so this
// needs no caps.
class SummaryMoves {
public:
    SummaryMoves(const BpaSystem& system, const BaseView& base) : system_(system), base_(base) {}

    LegalMoves run(ContextId ctx, std::span<const Var> config) {
        const Configuration seed_pd = pd_image(base_, ctx, config);
        LegalMoves out;
        out.outcomes.push_back(Outcome{tau_label(), seed_pd});
        push(config, ctx);
        while (!queue_.empty()) {
            const auto [y, c] = queue_.front();
            queue_.pop_front();
            expand(y, c, seed_pd, out.outcomes);
        }
        normalize(out.outcomes);
        return out;
    }

private:
    ActionId tau_label() const {
        for (ActionId a = 0; a < system_.action_count(); ++a) {
            if (system_.is_silent(a)) {
                return a;
            }
        }
        // No τ in the alphabet: the τ-outcome still needs a label; use an
        // id no rule can carry.
        return static_cast<ActionId>(system_.action_count());
    }

    const std::vector<std::uint8_t>& erasable(ContextId c) {
        auto it = erasable_.find(c);
        if (it != erasable_.end()) {
            return it->second;
        }
        const ContextSet& set = base_.context(c);
        std::vector<std::uint8_t> e(system_.variable_count(), 0);
        bool changed = true;
        while (changed) {
            changed = false;
            for (Var x : set.members()) {
                if (e[x] != 0) {
                    continue;
                }
                for (std::size_t ri : system_.rules_of(x)) {
                    const Rule& r = system_.rules()[ri];
                    if (!system_.is_silent(r.label)) {
                        continue;
                    }
                    if (std::all_of(r.body.begin(), r.body.end(),
                                    [&](Var v) { return set.contains(v) && e[v] != 0; })) {
                        e[x] = 1;
                        changed = true;
                        break;
                    }
                }
            }
        }
        return erasable_.emplace(c, std::move(e)).first->second;
    }

    // Makes the reachable leading symbols of s·(below) heads, where the
    // context below s is `bottom`.
    void push(std::span<const Var> s, ContextId bottom) {
        std::vector<ContextId> ctx(s.size());
        ContextId cur = bottom;
        for (std::size_t i = s.size(); i-- > 0;) {
            ctx[i] = cur;
            cur = red_context(base_, cur, s.subspan(i, 1));
        }
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (seen_.insert({s[i], ctx[i]}).second) {
                queue_.push_back({s[i], ctx[i]});
            }
            if (!base_.context(ctx[i]).contains(s[i]) || erasable(ctx[i])[s[i]] == 0) {
                break;
            }
        }
    }

    void expand(Var y, ContextId c, const Configuration& seed_pd, std::vector<Outcome>& out) {
        const Configuration head_pd = pd_image(base_, c, std::span<const Var>(&y, 1));
        if (head_pd.size() > seed_pd.size() ||
            !std::equal(head_pd.begin(), head_pd.end(), seed_pd.begin())) {
            throw Error("internal: closure head outside the seed's class");
        }
        const std::span<const Var> rest(seed_pd.data() + head_pd.size(),
                                        seed_pd.size() - head_pd.size());
        const ContextSet& set = base_.context(c);
        for (std::size_t ri : system_.rules_of(y)) {
            const Rule& r = system_.rules()[ri];
            Configuration image = pd_image(base_, c, r.body);
            image.insert(image.end(), rest.begin(), rest.end());
            out.push_back(Outcome{r.label, std::move(image)});
            if (!system_.is_silent(r.label)) {
                continue;
            }
            if (set.contains(y)) {
                if (set.covers(r.body)) {
                    push(r.body, c);
                }
                continue;
            }
            const std::size_t k = class_carrier_end(set, r.body);
            if (k == 0) {
                continue;
            }
            const std::span<const Var> carrier(r.body.data(), k);
            if (pd_image(base_, c, carrier) == head_pd) {
                push(carrier, c);
            }
        }
    }

    const BpaSystem& system_;
    const BaseView& base_;
    std::unordered_map<ContextId, std::vector<std::uint8_t>> erasable_;
    std::set<std::pair<Var, ContextId>> seen_;
    std::deque<std::pair<Var, ContextId>> queue_;
};

} // namespace

const char* to_string(PairVerdict v) noexcept {
    switch (v) {
    case PairVerdict::Consistent:
        return "consistent";
    case PairVerdict::Inconsistent:
        return "inconsistent";
    case PairVerdict::Indeterminate:
        return "indeterminate";
    }
    return "?";
}

ClosureResult tau_closure(const BpaSystem& system, const BaseView& base, ContextId ctx,
                          std::span<const Var> seed, const ClosureCaps& caps) {
    const std::size_t len_cap = caps.len_cap != 0 ? caps.len_cap : default_len_cap(system, seed.size());
    const Configuration seed_pd = pd_image(base, ctx, seed);
    ClosureResult out;
    std::unordered_set<Configuration, ConfigurationHash> seen;
    out.members.emplace_back(seed.begin(), seed.end());
    seen.insert(out.members.back());

    auto add = [&](Configuration next) {
        if (next.size() > len_cap) {
            out.truncated = true;
            return;
        }
        if (seen.count(next) != 0) {
            return;
        }
        if (out.members.size() >= caps.size_cap) {
            out.truncated = true;
            return;
        }
        if (pd_image(base, ctx, next) != seed_pd) {
            throw Error("internal: closure member left the seed's class");
        }
        seen.insert(next);
        out.members.push_back(std::move(next));
    };

    for (std::size_t i = 0; i < out.members.size(); ++i) {
        const Configuration member = out.members[i];
        if (member.empty()) {
            continue;
        }
        const Var y = member.front();
        const std::span<const Var> tail(member.data() + 1, member.size() - 1);
        const ContextId rc = red_context(base, ctx, tail);
        const ContextSet& set = base.context(rc);
        for (std::size_t ri : system.rules_of(y)) {
            const Rule& r = system.rules()[ri];
            if (!system.is_silent(r.label)) {
                continue;
            }
            if (set.contains(y)) {
                if (set.covers(r.body)) {
                    add(concat(r.body, tail));
                }
                continue;
            }
            const std::size_t k = class_carrier_end(set, r.body);
            if (k == 0) {
                continue;
            }
            const std::span<const Var> carrier(r.body.data(), k);
            if (pd_image(base, rc, carrier) == pd_image(base, rc, std::span<const Var>(&y, 1))) {
                add(concat(carrier, tail));
            }
        }
    }
    return out;
}

LegalMoves legal_moves(const BpaSystem& system, const BaseView& base, ContextId ctx,
                       std::span<const Var> config, const ClosureCaps& caps) {
    if (caps.mode == ClosureMode::Summary) {
        return SummaryMoves(system, base).run(ctx, config);
    }
    LegalMoves out;
    const ClosureResult closure = tau_closure(system, base, ctx, config, caps);
    out.truncated = closure.truncated;
    ActionId tau = static_cast<ActionId>(system.action_count());
    for (ActionId a = 0; a < system.action_count(); ++a) {
        if (system.is_silent(a)) {
            tau = a;
            break;
        }
    }
    out.outcomes.push_back(Outcome{tau, pd_image(base, ctx, config)});
    for (const Configuration& m : closure.members) {
        for (const Transition& t : transitions(system, m)) {
            out.outcomes.push_back(Outcome{t.label, pd_image(base, ctx, t.target)});
        }
    }
    normalize(out.outcomes);
    return out;
}

namespace {

PairReport compare_moves(const LegalMoves& left, const LegalMoves& right) {
    PairReport report;
    report.left_truncated = left.truncated;
    report.right_truncated = right.truncated;
    std::set_difference(left.outcomes.begin(), left.outcomes.end(), right.outcomes.begin(),
                        right.outcomes.end(), std::back_inserter(report.missing));
    std::set_difference(right.outcomes.begin(), right.outcomes.end(), left.outcomes.begin(),
                        left.outcomes.end(), std::back_inserter(report.extra));
    if (left.truncated || right.truncated) {
        report.verdict = PairVerdict::Indeterminate;
    } else if (!report.missing.empty() || !report.extra.empty()) {
        report.verdict = PairVerdict::Inconsistent;
    }
    return report;
}

} // namespace

PairReport consistent_pair(const BpaSystem& system, const BaseView& base, ContextId ctx, Var var,
                           std::span<const Var> body, const ClosureCaps& caps) {
    const std::span<const Var> lhs(&var, 1);
    if (pd_image(base, ctx, lhs) != pd_image(base, ctx, body)) {
        PairReport report;
        report.verdict = PairVerdict::Inconsistent;
        report.pd_differs = true;
        return report;
    }
    return compare_moves(legal_moves(system, base, ctx, lhs, caps),
                         legal_moves(system, base, ctx, body, caps));
}

ConsistencyReport check_consistency(const BpaSystem& system, const Base& base,
                                    const ClosureCaps& caps) {
    ConsistencyReport report;
    std::map<std::pair<ContextId, Var>, LegalMoves> var_moves;
    bool indeterminate = false;
    bool inconsistent = false;

    auto check = [&](bool propagation, Var var, Configuration body, ContextId c) {
        ++report.checked;
        TripleReport t{propagation, var, std::move(body), c, {}};
        const std::span<const Var> lhs(&t.var, 1);
        PdOutcome l = evaluate_pd(base, c, lhs);
        PdOutcome r = evaluate_pd(base, c, t.body);
        if (!l.ok() || !r.ok() || l.image != r.image) {
            t.pair.verdict = PairVerdict::Inconsistent;
            t.pair.pd_differs = true;
        } else {
            auto it = var_moves.find({c, var});
            if (it == var_moves.end()) {
                it = var_moves.emplace(std::make_pair(c, var), legal_moves(system, base, c, lhs, caps))
                         .first;
            }
            t.pair = compare_moves(it->second, legal_moves(system, base, c, t.body, caps));
        }
        if (t.pair.verdict == PairVerdict::Inconsistent) {
            inconsistent = true;
        } else if (t.pair.verdict == PairVerdict::Indeterminate) {
            indeterminate = true;
        }
        if (t.pair.verdict != PairVerdict::Consistent) {
            report.failures.push_back(std::move(t));
        }
    };

    for (const DecTriple& d : base.source().dec) {
        if (const auto c = base.find_context(d.context)) {
            check(false, d.var, d.body, *c);
        }
    }
    for (const PropTriple& p : base.source().prop) {
        if (const auto c = base.find_context(p.context)) {
            check(true, p.prime, Configuration{p.redundant, p.prime}, *c);
        }
    }
    report.verdict = inconsistent    ? PairVerdict::Inconsistent
                     : indeterminate ? PairVerdict::Indeterminate
                                     : PairVerdict::Consistent;
    return report;
}

std::string render_outcome(const BpaSystem& system, const Outcome& o) {
    const std::string label =
        o.label < system.action_count() ? system.action(o.label).name : std::string("tau");
    return "(" + label + ", " + render(system, o.image) + ")";
}

namespace {

std::string render_triple(const BpaSystem& system, const Base& base, const TripleReport& t) {
    return "(" + system.var_name(t.var) + ", " + render(system, t.body) + ", " +
           base.context(t.context).str(system) + ")";
}

const char* truncated_side(const PairReport& p) {
    if (p.left_truncated && p.right_truncated) {
        return "both";
    }
    if (p.left_truncated) {
        return "left";
    }
    if (p.right_truncated) {
        return "right";
    }
    return "none";
}

} // namespace

std::string render_report(const BpaSystem& system, const Base& base,
                          const ConsistencyReport& report) {
    std::ostringstream os;
    os << to_string(report.verdict) << " (" << report.checked << " triples checked)\n";
    for (const TripleReport& t : report.failures) {
        os << "  " << (t.propagation ? "propagation " : "decomposition ")
           << render_triple(system, base, t) << ": " << to_string(t.pair.verdict);
        if (t.pair.pd_differs) {
            os << ", decompositions differ";
        }
        if (t.pair.left_truncated || t.pair.right_truncated) {
            os << ", closure truncated on " << truncated_side(t.pair) << " side";
        }
        os << '\n';
        for (const Outcome& o : t.pair.missing) {
            os << "    only for " << system.var_name(t.var) << ": " << render_outcome(system, o)
               << '\n';
        }
        for (const Outcome& o : t.pair.extra) {
            os << "    only for " << render(system, t.body) << ": " << render_outcome(system, o)
               << '\n';
        }
    }
    return os.str();
}

nlohmann::json report_to_json(const BpaSystem& system, const Base& base,
                              const ConsistencyReport& report) {
    using nlohmann::json;
    auto outcomes = [&](const std::vector<Outcome>& v) {
        json arr = json::array();
        for (const Outcome& o : v) {
            arr.push_back({{"label", o.label < system.action_count() ? system.action(o.label).name
                                                                     : std::string("tau")},
                           {"image", config_to_json(system, o.image)}});
        }
        return arr;
    };
    json records = json::array();
    for (const TripleReport& t : report.failures) {
        records.push_back({{"triple", render_triple(system, base, t)},
                           {"kind", t.propagation ? "prop" : "dec"},
                           {"verdict", to_string(t.pair.verdict)},
                           {"side", truncated_side(t.pair)},
                           {"pd_differs", t.pair.pd_differs},
                           {"missing", outcomes(t.pair.missing)},
                           {"extra", outcomes(t.pair.extra)},
                           {"truncated", t.pair.left_truncated || t.pair.right_truncated}});
    }
    return {{"verdict", to_string(report.verdict)},
            {"checked", report.checked},
            {"failures", std::move(records)}};
}

} // namespace nbpa
