#include "nbpa/oracle.hpp"

#include "nbpa/base_io.hpp"
#include "scc.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

namespace nbpa {

StateId FiniteLts::add_state() {
    succ.emplace_back();
    return static_cast<StateId>(succ.size() - 1);
}

void FiniteLts::add_edge(StateId from, ActionId label, StateId to) {
    succ.at(from).push_back(LtsEdge{label, to});
}

std::vector<std::uint32_t> finite_branching_quotient(const FiniteLts& lts) {
    using Sig = std::vector<std::pair<ActionId, std::uint32_t>>;
    const std::size_t n = lts.size();
    std::vector<std::uint32_t> block(n, 0);
    std::size_t blocks = n == 0 ? 0 : 1;

    while (true) {
        // Inert τ-steps stay inside the current block.
        std::vector<std::vector<std::uint32_t>> inert(n);
        std::vector<Sig> sig(n);
        for (std::size_t s = 0; s < n; ++s) {
            for (const LtsEdge& e : lts.succ[s]) {
                if (e.label == lts.tau && block[e.target] == block[s]) {
                    inert[s].push_back(e.target);
                } else {
                    sig[s].push_back({e.label, block[e.target]});
                }
            }
        }
        std::uint32_t ncomp = 0;
        const auto comp = detail::strongly_connected(inert, &ncomp);
        std::vector<std::vector<std::uint32_t>> members(ncomp);
        for (std::uint32_t s = 0; s < n; ++s) {
            members[comp[s]].push_back(s);
        }
        // Components complete successors-first, so inert successors are
        // already final when a component is merged.
        std::vector<Sig> comp_sig(ncomp);
        for (std::uint32_t c = 0; c < ncomp; ++c) {
            Sig acc;
            for (std::uint32_t s : members[c]) {
                acc.insert(acc.end(), sig[s].begin(), sig[s].end());
                for (std::uint32_t t : inert[s]) {
                    if (comp[t] != c) {
                        acc.insert(acc.end(), comp_sig[comp[t]].begin(), comp_sig[comp[t]].end());
                    }
                }
            }
            std::sort(acc.begin(), acc.end());
            acc.erase(std::unique(acc.begin(), acc.end()), acc.end());
            comp_sig[c] = std::move(acc);
        }
        std::map<std::pair<std::uint32_t, const Sig*>, std::uint32_t,
                 bool (*)(const std::pair<std::uint32_t, const Sig*>&,
                          const std::pair<std::uint32_t, const Sig*>&)>
            ids([](const auto& a, const auto& b) {
                if (a.first != b.first) {
                    return a.first < b.first;
                }
                return *a.second < *b.second;
            });
        std::vector<std::uint32_t> next(n);
        for (std::uint32_t s = 0; s < n; ++s) {
            const auto key = std::make_pair(block[s], &comp_sig[comp[s]]);
            auto it = ids.find(key);
            if (it == ids.end()) {
                it = ids.emplace(key, static_cast<std::uint32_t>(ids.size())).first;
            }
            next[s] = it->second;
        }
        block = std::move(next);
        if (ids.size() == blocks) {
            break;
        }
        blocks = ids.size();
    }
    return block;
}

const char* to_string(Tri t) noexcept {
    switch (t) {
    case Tri::Yes:
        return "yes";
    case Tri::No:
        return "no";
    case Tri::Unknown:
        return "unknown";
    }
    return "?";
}

namespace {

ActionId find_tau(const BpaSystem& system) {
    for (ActionId a = 0; a < system.action_count(); ++a) {
        if (system.is_silent(a)) {
            return a;
        }
    }
    return kNoTau;
}

std::uint64_t pair_key(StateId a, StateId b) {
    if (a > b) {
        std::swap(a, b);
    }
    return (std::uint64_t{a} << 32) | b;
}

} // namespace

OracleSession::OracleSession(const BpaSystem& system, const std::vector<Configuration>& roots,
                             OracleParams params)
    : system_(system), params_(params) {
    lts_.tau = find_tau(system);
    auto intern = [&](const Configuration& c) -> StateId {
        const StateId id = lts_.add_state();
        states_.push_back(c);
        tainted_.push_back(0);
        index_.emplace(c, id);
        return id;
    };
    for (const Configuration& r : roots) {
        if (index_.count(r) == 0) {
            intern(r);
        }
    }
    for (StateId s = 0; s < states_.size(); ++s) {
        const Configuration current = states_[s];
        for (Transition& t : transitions(system, current)) {
            if (t.target.size() > params_.len_cap) {
                tainted_[s] = 1;
                continue;
            }
            auto it = index_.find(t.target);
            StateId target;
            if (it != index_.end()) {
                target = it->second;
            } else if (states_.size() >= params_.state_cap) {
                tainted_[s] = 1;
                continue;
            } else {
                target = intern(t.target);
            }
            lts_.add_edge(s, t.label, target);
        }
    }

    // Tainted states get a label nothing else carries, so they can only
    // share a block with states that reach them inertly.
    FiniteLts marked = lts_;
    const ActionId fresh = static_cast<ActionId>(system.action_count());
    for (StateId s = 0; s < states_.size(); ++s) {
        if (tainted_[s] != 0) {
            marked.add_edge(s, fresh + s, s);
        }
    }
    block_ = finite_branching_quotient(marked);
}

std::optional<StateId> OracleSession::state_of(std::span<const Var> config) const {
    auto it = index_.find(Configuration(config.begin(), config.end()));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t OracleSession::tainted_count() const noexcept {
    return static_cast<std::size_t>(std::count(tainted_.begin(), tainted_.end(), 1));
}

bool OracleSession::same_class(std::span<const Var> a, std::span<const Var> b) const {
    const auto sa = state_of(a);
    const auto sb = state_of(b);
    return sa && sb && block_[*sa] == block_[*sb];
}

std::optional<std::uint64_t> OracleSession::class_changes(std::span<const Var> from,
                                                          std::span<const Var> to) const {
    const auto s = state_of(from);
    const auto t = state_of(to);
    if (!s || !t) {
        return std::nullopt;
    }
    constexpr std::uint64_t kInf = static_cast<std::uint64_t>(-1);
    std::vector<std::uint64_t> dist(states_.size(), kInf);
    std::deque<StateId> dq;
    dist[*s] = 0;
    dq.push_back(*s);
    while (!dq.empty()) {
        const StateId u = dq.front();
        dq.pop_front();
        for (const LtsEdge& e : lts_.succ[u]) {
            const std::uint64_t w = block_[e.target] == block_[u] ? 0 : 1;
            if (dist[u] + w < dist[e.target]) {
                dist[e.target] = dist[u] + w;
                if (w == 0) {
                    dq.push_front(e.target);
                } else {
                    dq.push_back(e.target);
                }
            }
        }
    }
    if (dist[*t] == kInf) {
        return std::nullopt;
    }
    return dist[*t];
}

OracleAnswer OracleSession::check(std::span<const Var> left, std::span<const Var> right) const {
    OracleAnswer answer;
    answer.states = states_.size();
    answer.tainted = tainted_count();
    const auto a = state_of(left);
    const auto b = state_of(right);
    if (!a || !b) {
        return answer;
    }
    if (block_[*a] == block_[*b]) {
        answer.value = Tri::Yes;
        return answer;
    }
    Refutation r;
    if (refute(*a, *b, r, answer)) {
        answer.value = Tri::No;
        answer.refutation = std::move(r);
    }
    return answer;
}

namespace {

// Pairs refuted so far, with the round that refuted them.
class Refuted {
public:
    std::size_t round_of(StateId a, StateId b) const {
        auto it = rounds_.find(pair_key(a, b));
        return it == rounds_.end() ? 0 : it->second;
    }
    /// Refuted strictly before `round`.
    bool before(StateId a, StateId b, std::size_t round) const {
        const std::size_t r = round_of(a, b);
        return r != 0 && r < round;
    }
    void mark(StateId a, StateId b, std::size_t round) { rounds_.emplace(pair_key(a, b), round); }

private:
    std::unordered_map<std::uint64_t, std::size_t> rounds_;
};

struct Attack {
    StateId attacker;
    StateId defender;
    ActionId label;
    StateId target;
};

} // namespace

bool OracleSession::refute(StateId root_a, StateId root_b, Refutation& out,
                           OracleAnswer& stats) const {
    const ActionId tau = lts_.tau;
    const std::size_t tau_cap = params_.tau_cap;

    // τ-reachable states from `from`, all of them, up to tau_cap steps.
    auto tau_reach = [&](StateId from) {
        std::vector<StateId> seen{from};
        std::unordered_set<StateId> in{from};
        std::size_t level_end = 1;
        std::size_t level = 0;
        for (std::size_t i = 0; i < seen.size(); ++i) {
            if (i == level_end) {
                ++level;
                level_end = seen.size();
            }
            if (level >= tau_cap) {
                break;
            }
            for (const LtsEdge& e : lts_.succ[seen[i]]) {
                if (e.label == tau && in.insert(e.target).second) {
                    seen.push_back(e.target);
                }
            }
        }
        return seen;
    };

    // Relevant pairs: everything an attack on a relevant pair may consult.
    std::vector<std::pair<StateId, StateId>> pairs;
    std::unordered_set<std::uint64_t> known;
    auto add_pair = [&](StateId a, StateId b) {
        if (a != b && known.insert(pair_key(a, b)).second) {
            pairs.push_back({a, b});
        }
    };
    add_pair(root_a, root_b);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (pairs.size() > params_.pair_cap) {
            stats.pairs = pairs.size();
            return false;
        }
        for (int side = 0; side < 2; ++side) {
            const StateId x = side == 0 ? pairs[i].first : pairs[i].second;
            const StateId y = side == 0 ? pairs[i].second : pairs[i].first;
            const auto w = tau_reach(y);
            for (StateId u : w) {
                add_pair(x, u);
            }
            for (const LtsEdge& att : lts_.succ[x]) {
                if (att.label == tau) {
                    add_pair(att.target, y);
                }
                for (StateId u : w) {
                    for (const LtsEdge& e : lts_.succ[u]) {
                        if (e.label == att.label) {
                            add_pair(att.target, e.target);
                        }
                    }
                }
            }
        }
    }
    stats.pairs = pairs.size();

    Refuted refuted;
    std::unordered_map<std::uint64_t, Attack> how;

    // Can `defender` answer attacker -label-> target, given pairs refuted
    // before `round`?  Responses are collected for the trace.
    // `blocked` collects the states whose refuted pair with the attacker
    // kept them out of the defender's τ-closure.
    auto defended = [&](const Attack& a, std::size_t round,
                        std::vector<std::pair<StateId, StateId>>* responses,
                        std::vector<StateId>* blocked) {
        if (a.label == tau && !refuted.before(a.target, a.defender, round)) {
            return true;
        }
        std::vector<StateId> w{a.defender};
        std::unordered_set<StateId> in{a.defender};
        std::vector<std::size_t> depth{0};
        for (std::size_t i = 0; i < w.size(); ++i) {
            const StateId u = w[i];
            if (tainted_[u] != 0) {
                return true;
            }
            for (const LtsEdge& e : lts_.succ[u]) {
                if (e.label == a.label) {
                    if (!refuted.before(a.target, e.target, round)) {
                        return true;
                    }
                    if (responses != nullptr) {
                        responses->push_back({u, e.target});
                    }
                }
                if (e.label == tau && blocked != nullptr && e.target != a.attacker &&
                    refuted.before(a.attacker, e.target, round)) {
                    blocked->push_back(e.target);
                }
                if (e.label == tau && !refuted.before(a.attacker, e.target, round) &&
                    in.insert(e.target).second) {
                    if (depth[i] + 1 > tau_cap) {
                        return true;
                    }
                    w.push_back(e.target);
                    depth.push_back(depth[i] + 1);
                }
            }
        }
        return false;
    };

    std::size_t round = 0;
    while (round < params_.depth && refuted.round_of(root_a, root_b) == 0) {
        ++round;
        bool changed = false;
        for (const auto& [p, q] : pairs) {
            if (refuted.round_of(p, q) != 0) {
                continue;
            }
            bool done = false;
            for (int side = 0; side < 2 && !done; ++side) {
                const StateId x = side == 0 ? p : q;
                const StateId y = side == 0 ? q : p;
                for (const LtsEdge& att : lts_.succ[x]) {
                    const Attack a{x, y, att.label, att.target};
                    if (!defended(a, round, nullptr, nullptr)) {
                        refuted.mark(p, q, round);
                        how.emplace(pair_key(p, q), a);
                        done = true;
                        changed = true;
                        break;
                    }
                }
            }
        }
        if (!changed) {
            break;
        }
    }
    stats.rounds = round;
    const std::size_t root_round = refuted.round_of(root_a, root_b);
    if (root_round == 0) {
        return false;
    }

    // Collect the steps the root depends on.
    std::vector<std::uint64_t> order;
    std::unordered_set<std::uint64_t> needed;
    std::vector<std::uint64_t> stack{pair_key(root_a, root_b)};
    needed.insert(stack.back());
    std::map<std::uint64_t, std::vector<std::pair<StateId, StateId>>> responses;
    while (!stack.empty()) {
        const std::uint64_t key = stack.back();
        stack.pop_back();
        order.push_back(key);
        const Attack& a = how.at(key);
        const std::size_t r = refuted.round_of(a.attacker, a.defender);
        auto& resp = responses[key];
        std::vector<StateId> blocked;
        defended(a, r, &resp, &blocked);
        std::vector<std::uint64_t> deps;
        for (StateId b : blocked) {
            deps.push_back(pair_key(a.attacker, b));
        }
        if (a.label == tau) {
            deps.push_back(pair_key(a.target, a.defender));
        }
        for (const auto& [u, t] : resp) {
            deps.push_back(pair_key(a.target, t));
        }
        for (std::uint64_t d : deps) {
            if (needed.insert(d).second) {
                stack.push_back(d);
            }
        }
    }
    std::stable_sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) {
        const Attack& x = how.at(a);
        const Attack& y = how.at(b);
        return refuted.round_of(x.attacker, x.defender) < refuted.round_of(y.attacker, y.defender);
    });
    for (std::uint64_t key : order) {
        const Attack& a = how.at(key);
        RefutationStep step;
        step.attacker = states_[a.attacker];
        step.defender = states_[a.defender];
        step.label = a.label;
        step.target = states_[a.target];
        step.round = refuted.round_of(a.attacker, a.defender);
        for (const auto& [u, t] : responses[key]) {
            step.responses.push_back({states_[u], states_[t]});
        }
        out.steps.push_back(std::move(step));
    }
    return true;
}

OracleAnswer approximant_check(const BpaSystem& system, std::span<const Var> left,
                               std::span<const Var> right, const OracleParams& params) {
    const OracleSession session(system,
                                {Configuration(left.begin(), left.end()),
                                 Configuration(right.begin(), right.end())},
                                params);
    return session.check(left, right);
}

ContextSet estimate_red(const BpaSystem& system, std::span<const Var> gamma,
                        const OracleParams& params) {
    std::vector<Configuration> roots{Configuration(gamma.begin(), gamma.end())};
    for (Var x = 0; x < system.variable_count(); ++x) {
        Configuration c{x};
        c.insert(c.end(), gamma.begin(), gamma.end());
        roots.push_back(std::move(c));
    }
    const OracleSession session(system, roots, params);
    ContextSet out(system.variable_count());
    for (Var x = 0; x < system.variable_count(); ++x) {
        if (session.same_class(roots[x + 1], roots[0])) {
            out.insert(x);
        }
    }
    return out;
}

bool verify_refutation(const BpaSystem& system, const Refutation& refutation,
                       std::size_t tau_cap) {
    if (refutation.steps.empty()) {
        return false;
    }
    using Pair = std::pair<Configuration, Configuration>;
    std::set<Pair> refuted;
    auto is_refuted = [&](const Configuration& a, const Configuration& b) {
        return refuted.count(a < b ? Pair{a, b} : Pair{b, a}) != 0;
    };
    for (const RefutationStep& step : refutation.steps) {
        const auto moves = transitions(system, step.attacker);
        const bool attack_exists = std::any_of(moves.begin(), moves.end(), [&](const Transition& t) {
            return t.label == step.label && t.target == step.target;
        });
        if (!attack_exists) {
            return false;
        }
        const bool tau_attack = system.is_silent(step.label);
        if (tau_attack && !is_refuted(step.target, step.defender)) {
            return false;
        }
        std::vector<Configuration> w{step.defender};
        std::vector<std::size_t> depth{0};
        std::set<Configuration> in{step.defender};
        for (std::size_t i = 0; i < w.size(); ++i) {
            const Configuration u = w[i];
            for (const Transition& t : transitions(system, u)) {
                if (t.label == step.label && !is_refuted(step.target, t.target)) {
                    return false;
                }
                if (system.is_silent(t.label) && !is_refuted(step.attacker, t.target) &&
                    in.insert(t.target).second) {
                    if (depth[i] + 1 > tau_cap) {
                        return false;
                    }
                    w.push_back(t.target);
                    depth.push_back(depth[i] + 1);
                }
            }
        }
        refuted.insert(step.attacker < step.defender ? Pair{step.attacker, step.defender}
                                                     : Pair{step.defender, step.attacker});
    }
    return true;
}

std::string render_refutation(const BpaSystem& system, const Refutation& refutation) {
    std::ostringstream os;
    for (const RefutationStep& s : refutation.steps) {
        const std::string label = system.action(s.label).name;
        os << "round " << s.round << ": " << render(system, s.attacker) << "  vs  "
           << render(system, s.defender) << '\n';
        os << "  move      " << render(system, s.attacker) << " -" << label << "-> "
           << render(system, s.target) << '\n';
        if (system.is_silent(s.label)) {
            os << "  stutter   " << render(system, s.defender) << " stays put  (refuted earlier)\n";
        }
        for (const auto& [from, to] : s.responses) {
            os << "  response  " << render(system, from) << " -" << label << "-> "
               << render(system, to) << "  (refuted earlier)\n";
        }
        if (s.responses.empty()) {
            os << "  response  none\n";
        }
    }
    return os.str();
}

nlohmann::json refutation_to_json(const BpaSystem& system, const Refutation& refutation) {
    nlohmann::json steps = nlohmann::json::array();
    for (const RefutationStep& s : refutation.steps) {
        steps.push_back({{"round", s.round},
                         {"attacker", config_to_json(system, s.attacker)},
                         {"defender", config_to_json(system, s.defender)},
                         {"label", system.action(s.label).name},
                         {"target", config_to_json(system, s.target)}});
    }
    return {{"steps", std::move(steps)}};
}

} // namespace nbpa
