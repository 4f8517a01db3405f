#include "nbpa/propose.hpp"

#include <algorithm>
#include <unordered_map>

namespace nbpa {

namespace {

Configuration append(std::span<const Var> a, std::span<const Var> b) {
    Configuration out(a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

// Calls f(β) for every β ∈ V^len in lexicographic order until f returns false.
template <class F>
bool for_each_word(std::size_t nvars, std::size_t len, F&& f) {
    if (nvars == 0) {
        return true;
    }
    Configuration word(len, 0);
    while (true) {
        if (!f(word)) {
            return false;
        }
        std::size_t i = len;
        while (i > 0 && word[i - 1] + 1 == nvars) {
            word[--i] = 0;
        }
        if (i == 0) {
            return true;
        }
        ++word[i - 1];
    }
}

} // namespace

ProposeResult propose_base(const BpaSystem& system, const NormTable& norms,
                           const ProposeParams& params) {
    const std::size_t n = system.variable_count();
    ProposeResult result;

    struct Pending {
        ContextSet set;
        Configuration rep;
    };
    std::vector<Pending> contexts{{ContextSet(n), {}}};
    std::unordered_map<ContextSet, std::size_t, ContextSetHash> index{{ContextSet(n), 0}};

    for (std::size_t ci = 0; ci < contexts.size(); ++ci) {
        if (contexts.size() > params.max_contexts) {
            result.usable = false;
            result.note = "too many contexts";
            break;
        }
        const ContextSet r = contexts[ci].set;
        const Configuration gamma = contexts[ci].rep;
        OracleParams op = params.oracle;
        op.len_cap += gamma.size();

        std::vector<Configuration> roots{gamma};
        std::vector<Var> outside;
        for (Var x = 0; x < n; ++x) {
            if (!r.contains(x)) {
                outside.push_back(x);
                roots.push_back(append(std::span<const Var>(&x, 1), gamma));
            }
        }
        std::vector<std::uint64_t> cc(n, 0);
        {
            const OracleSession session(system, roots, op);
            for (std::size_t i = 0; i < outside.size(); ++i) {
                const Var x = outside[i];
                cc[x] = std::max<std::uint64_t>(
                    session.class_changes(roots[i + 1], gamma).value_or(norms[x]), 1);
            }
        }
        std::stable_sort(outside.begin(), outside.end(),
                         [&](Var a, Var b) { return cc[a] < cc[b]; });

        std::vector<Var> primes;
        std::unordered_map<Var, ContextSet> red;
        for (Var x : outside) {
            const Configuration head{x};
            std::vector<Configuration> candidates;
            for (std::size_t ri : system.rules_of(x)) {
                const Rule& rule = system.rules()[ri];
                // a body ending in x itself cannot be a decomposition of x
                if (system.is_silent(rule.label) && !rule.body.empty() &&
                    rule.body.back() != x && rule.body.size() <= norms[x]) {
                    candidates.push_back(rule.body);
                }
            }
            for (Var b : primes) {
                if (cc[b] == cc[x]) {
                    candidates.push_back({b});
                }
            }
            const std::size_t max_len =
                std::min<std::size_t>(params.max_prefix, norms[x] > 0 ? norms[x] - 1 : 0);
            for (std::size_t len = 1; len <= max_len; ++len) {
                for (Var b : primes) {
                    if (cc[b] >= cc[x] || len > cc[x] - cc[b]) {
                        continue;
                    }
                    const ContextSet& rb = red.at(b);
                    for_each_word(n, len, [&](const Configuration& beta) {
                        if (rb.contains(beta.back())) {
                            return true;
                        }
                        Configuration c = beta;
                        c.push_back(b);
                        candidates.push_back(std::move(c));
                        return candidates.size() < params.max_candidates;
                    });
                }
            }

            std::optional<Configuration> body;
            if (!candidates.empty()) {
                std::vector<Configuration> croots{append(head, gamma)};
                for (const Configuration& c : candidates) {
                    croots.push_back(append(c, gamma));
                }
                const OracleSession session(system, croots, op);
                for (std::size_t i = 0; i < candidates.size(); ++i) {
                    if (session.same_class(croots[0], croots[i + 1])) {
                        body = candidates[i];
                        break;
                    }
                }
            }
            if (body) {
                result.base.dec.push_back(DecTriple{x, std::move(*body), r});
                continue;
            }
            primes.push_back(x);
            const ContextSet rx = estimate_red(system, append(head, gamma), op);
            red.emplace(x, rx);
            for (Var y : rx.members()) {
                result.base.prop.push_back(PropTriple{x, y, r});
            }
            if (index.count(rx) == 0) {
                index.emplace(rx, contexts.size());
                contexts.push_back({rx, append(head, gamma)});
            }
        }
        std::sort(primes.begin(), primes.end());
        result.base.primes.emplace_back(r, std::move(primes));
    }

    for (const Pending& p : contexts) {
        result.base.domain.push_back(p.set);
    }
    if (!result.usable) {
        return result;
    }

    // Replace every body by its decomposition through the assembled
    // candidate, which makes the bodies fixed points.
    const Base compiled(n, norms, result.base);
    for (DecTriple& d : result.base.dec) {
        const auto c = compiled.find_context(d.context);
        const Unit& u = compiled.unit(*c, d.var);
        if (u.status != PdStatus::Ok) {
            result.usable = false;
            result.note = std::string("decomposition of ") + system.var_name(d.var) + " in " +
                          d.context.str(system) + ": " + to_string(u.status);
            return result;
        }
        d.body = u.image;
    }
    const Diagnostics diags = check_pre_base(system, result.base);
    if (!diags.empty()) {
        result.usable = false;
        result.note = diags.front().condition + ": " + diags.front().message;
    }
    return result;
}

} // namespace nbpa
