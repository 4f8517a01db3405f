// Helpers shared by the test binaries: a seeded random family of small
// normed systems, certified bases for them, and reference implementations
// written straight from the definitions.
#pragma once

#include "nbpa/search.hpp"
#include "nbpa/semantics.hpp"

#include <deque>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>

namespace test_support {

using namespace nbpa;

inline std::string data_path(const std::string& name) { return std::string(NBPA_DATA_DIR) + "/" + name; }

inline Configuration conf(const BpaSystem& s, const std::string& text) { return parse_configuration(s, text); }

inline ContextSet ctx(const BpaSystem& s, std::initializer_list<const char*> names) {
    ContextSet out(s.variable_count());
    for (const char* n : names) {
        out.insert(*s.find_variable(n));
    }
    return out;
}

/// Systems with at most 4 variables, 6 rules and bodies of length ≤ 2 over
/// actions a, b, tau; normed and silent-free.  Rejection sampling, so the
/// sequence depends only on the generator state.
inline BpaSystem random_system(std::mt19937& rng) {
    static const char* names[] = {"P", "Q", "R", "T"};
    while (true) {
        const std::size_t nvars = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
        const std::size_t nrules = std::uniform_int_distribution<std::size_t>(nvars, 6)(rng);
        BpaSystem s;
        for (std::size_t i = 0; i < nvars; ++i) {
            s.add_variable(names[i]);
        }
        const ActionId acts[] = {s.add_action("a"), s.add_action("b"), s.add_action("tau")};
        std::uniform_int_distribution<Var> var(0, static_cast<Var>(nvars - 1));
        std::uniform_int_distribution<int> act(0, 2), len(0, 2);
        for (std::size_t r = 0; r < nrules; ++r) {
            // every variable gets at least one rule
            const Var head = r < nvars ? static_cast<Var>(r) : var(rng);
            Configuration body(static_cast<std::size_t>(len(rng)));
            for (Var& v : body) {
                v = var(rng);
            }
            s.add_rule(head, acts[act(rng)], std::move(body));
        }
        if (!check_normed(s).normed || !detect_silent_variables(s).empty()) {
            continue;
        }
        return s;
    }
}

inline Configuration random_config(std::mt19937& rng, std::size_t nvars, std::size_t max_len) {
    Configuration c(std::uniform_int_distribution<std::size_t>(0, max_len)(rng));
    std::uniform_int_distribution<Var> var(0, static_cast<Var>(nvars - 1));
    for (Var& v : c) {
        v = var(rng);
    }
    return c;
}

/// A base that passed every check: the proposal when it verifies, otherwise
/// whatever a small search finds.
inline std::optional<PreBase> certified_base(const BpaSystem& s, const NormTable& norms) {
    const ProposeResult p = propose_base(s, norms);
    if (p.usable && verify_certificate(s, norms, p.base, {}, {}).ok) {
        return p.base;
    }
    SearchBounds bounds;
    bounds.max_nodes = 20000;
    bounds.time_limit = std::chrono::milliseconds(2000);
    const SearchOutcome out = search_bases(s, norms, {}, bounds);
    if (out.base && verify_certificate(s, norms, *out.base, {}, {}).ok) {
        return out.base;
    }
    return std::nullopt;
}

/// Norms by breadth-first search over configurations: the length of a
/// shortest path to ε.
inline Norm reference_norm(const BpaSystem& s, const Configuration& from, std::size_t max_len = 12) {
    std::set<Configuration> seen{from};
    std::deque<std::pair<Configuration, Norm>> queue{{from, 0}};
    while (!queue.empty()) {
        auto [c, d] = queue.front();
        queue.pop_front();
        if (c.empty()) {
            return d;
        }
        for (const Transition& t : transitions(s, c)) {
            if (t.target.size() <= max_len && seen.insert(t.target).second) {
                queue.push_back({t.target, d + 1});
            }
        }
    }
    return static_cast<Norm>(-1);
}

/// PD straight from the triples of a pre-base, with no compilation or
/// caching: the last symbol is decomposed in the current context, then the
/// rest in the context it leaves.
class NaivePd {
public:
    explicit NaivePd(const PreBase& base) : base_(base) {}

    std::pair<Configuration, ContextSet> eval(const ContextSet& r, const Configuration& alpha,
                                              int depth = 0) const {
        if (depth > 200) {
            throw Error("naive pd diverges");
        }
        Configuration image;
        ContextSet cur = r;
        for (auto it = alpha.rbegin(); it != alpha.rend(); ++it) {
            auto [img, next] = unit(cur, *it, depth);
            image.insert(image.begin(), img.begin(), img.end());
            cur = next;
        }
        return {image, cur};
    }

private:
    std::pair<Configuration, ContextSet> unit(const ContextSet& r, Var x, int depth) const {
        if (r.contains(x)) {
            return {{}, r};
        }
        for (const auto& [c, primes] : base_.primes) {
            if (c == r && std::find(primes.begin(), primes.end(), x) != primes.end()) {
                ContextSet red(r.universe());
                for (const PropTriple& p : base_.prop) {
                    if (p.context == r && p.prime == x) {
                        red.insert(p.redundant);
                    }
                }
                return {{x}, red};
            }
        }
        for (const DecTriple& d : base_.dec) {
            if (d.context == r && d.var == x) {
                return eval(r, d.body, depth + 1);
            }
        }
        throw Error("naive pd: no entry");
    }

    const PreBase& base_;
};

/// Branching transfer checked from the definition: for α →a α', β answers
/// with τ-steps through states equivalent to β (all with pd(β)), then an
/// a-step to a state with pd(α'), or a = τ and α' already matches β.
/// Returns nullopt when the bounded search is cut short.
inline std::optional<bool> transfer_holds(const BpaSystem& s, const BaseView& base, ContextId root,
                                          const Configuration& beta, ActionId label,
                                          const Configuration& target, std::size_t max_len,
                                          std::size_t max_states) {
    const Configuration want = pd_image(base, root, target);
    const Configuration from = pd_image(base, root, beta);
    if (s.is_silent(label) && want == from) {
        return true;
    }
    std::set<Configuration> seen{beta};
    std::deque<Configuration> queue{beta};
    bool cut = false;
    while (!queue.empty()) {
        const Configuration u = queue.front();
        queue.pop_front();
        for (const Transition& t : transitions(s, u)) {
            if (t.label == label && pd_image(base, root, t.target) == want) {
                return true;
            }
            if (s.is_silent(t.label) && pd_image(base, root, t.target) == from) {
                if (t.target.size() > max_len || seen.size() >= max_states) {
                    cut = true;
                } else if (seen.insert(t.target).second) {
                    queue.push_back(t.target);
                }
            }
        }
    }
    if (cut) {
        return std::nullopt;
    }
    return false;
}

} // namespace test_support
