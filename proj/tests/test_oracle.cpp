#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

using namespace test_support;

namespace {

// Greatest fixpoint of the branching transfer condition over all pairs.
std::vector<std::vector<bool>> reference_bisim(const FiniteLts& lts) {
    const std::size_t n = lts.size();
    std::vector<std::vector<bool>> tau_reach(n, std::vector<bool>(n, false));
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<StateId> stack{static_cast<StateId>(s)};
        tau_reach[s][s] = true;
        while (!stack.empty()) {
            const StateId u = stack.back();
            stack.pop_back();
            for (const LtsEdge& e : lts.succ[u]) {
                if (e.label == lts.tau && !tau_reach[s][e.target]) {
                    tau_reach[s][e.target] = true;
                    stack.push_back(e.target);
                }
            }
        }
    }
    std::vector<std::vector<bool>> rel(n, std::vector<bool>(n, true));
    auto matched = [&](StateId p, StateId q) {
        for (const LtsEdge& m : lts.succ[p]) {
            if (m.label == lts.tau && rel[m.target][q]) {
                continue;
            }
            bool ok = false;
            for (StateId mid = 0; mid < n && !ok; ++mid) {
                if (!tau_reach[q][mid] || !rel[p][mid]) {
                    continue;
                }
                for (const LtsEdge& r : lts.succ[mid]) {
                    if (r.label == m.label && rel[m.target][r.target]) {
                        ok = true;
                        break;
                    }
                }
            }
            if (!ok) {
                return false;
            }
        }
        return true;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (StateId p = 0; p < n; ++p) {
            for (StateId q = 0; q < n; ++q) {
                if (rel[p][q] && (!matched(p, q) || !matched(q, p))) {
                    rel[p][q] = rel[q][p] = false;
                    changed = true;
                }
            }
        }
    }
    return rel;
}

} // namespace

TEST_CASE("the five-state system separates s1 from s2") {
    FiniteLts lts;
    lts.tau = 0;
    const ActionId a = 1, b = 2;
    for (int i = 0; i < 5; ++i) {
        lts.add_state();
    }
    // s1..s5 are states 0..4
    lts.add_edge(0, lts.tau, 1);
    lts.add_edge(0, a, 4);
    lts.add_edge(1, lts.tau, 2);
    lts.add_edge(2, a, 4);
    lts.add_edge(1, a, 3);
    lts.add_edge(3, b, 4);
    const auto block = finite_branching_quotient(lts);
    CHECK(block[0] != block[1]);
    const auto ref = reference_bisim(lts);
    CHECK_FALSE(ref[0][1]);
    for (StateId p = 0; p < 5; ++p) {
        for (StateId q = 0; q < 5; ++q) {
            CHECK((block[p] == block[q]) == ref[p][q]);
        }
    }
}

TEST_CASE("quotients agree with the fixpoint definition on random graphs") {
    std::mt19937 rng(21);
    for (int round = 0; round < 300; ++round) {
        FiniteLts lts;
        lts.tau = 0;
        const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
        for (std::size_t i = 0; i < n; ++i) {
            lts.add_state();
        }
        const std::size_t edges = std::uniform_int_distribution<std::size_t>(0, 2 * n)(rng);
        std::uniform_int_distribution<StateId> st(0, static_cast<StateId>(n - 1));
        std::uniform_int_distribution<ActionId> lab(0, 2);
        for (std::size_t e = 0; e < edges; ++e) {
            lts.add_edge(st(rng), lab(rng), st(rng));
        }
        const auto block = finite_branching_quotient(lts);
        const auto ref = reference_bisim(lts);
        for (StateId p = 0; p < n; ++p) {
            for (StateId q = 0; q < n; ++q) {
                CHECK((block[p] == block[q]) == ref[p][q]);
            }
        }
    }
}

TEST_CASE("oracle answers on example 1") {
    const BpaSystem s = load_system(data_path("example1.bpa"));
    CHECK(approximant_check(s, conf(s, "S2 M23"), conf(s, "M23")).value == Tri::Yes);
    CHECK(approximant_check(s, conf(s, "M3 M23"), conf(s, "M23")).value == Tri::Yes);
    for (const auto& [l, r] : std::vector<std::pair<const char*, const char*>>{
             {"M23", "M3 M2"}, {"S1 M12", "M12 S1"}, {"A", "C"}, {"B", "C"}}) {
        const OracleAnswer a = approximant_check(s, conf(s, l), conf(s, r));
        REQUIRE(a.value == Tri::No);
        REQUIRE(a.refutation);
        CHECK(verify_refutation(s, *a.refutation, OracleParams{}.tau_cap));
        // the last step refutes the query itself
        const RefutationStep& last = a.refutation->steps.back();
        const std::set<Configuration> ends{last.attacker, last.defender};
        CHECK(ends == std::set<Configuration>{conf(s, l), conf(s, r)});
    }
}

TEST_CASE("tampered refutations are rejected") {
    const BpaSystem s = load_system(data_path("example1.bpa"));
    const OracleAnswer a = approximant_check(s, conf(s, "S1 M12"), conf(s, "M12 S1"));
    REQUIRE(a.refutation);
    const std::size_t tau_cap = OracleParams{}.tau_cap;

    Refutation no_deps = *a.refutation;
    no_deps.steps.erase(no_deps.steps.begin(), no_deps.steps.end() - 1);
    CHECK_FALSE(verify_refutation(s, no_deps, tau_cap));

    Refutation bad_move = *a.refutation;
    bad_move.steps.back().target = conf(s, "M3");
    CHECK_FALSE(verify_refutation(s, bad_move, tau_cap));

    // claims an equivalent pair is distinguished
    Refutation equal_pair = *a.refutation;
    equal_pair.steps.back().attacker = conf(s, "S1 M12");
    equal_pair.steps.back().defender = conf(s, "M12");
    CHECK_FALSE(verify_refutation(s, equal_pair, tau_cap));

    CHECK_FALSE(verify_refutation(s, Refutation{}, tau_cap));
    CHECK(render_refutation(s, *a.refutation).find("round 1:") == 0);
}

TEST_CASE("redundancy estimates") {
    const BpaSystem s = load_system(data_path("example1.bpa"));
    const ContextSet m23 = estimate_red(s, conf(s, "M23"));
    CHECK(m23.covers(ctx(s, {"S2", "S3", "M2", "M3", "M23"}).members()));
    CHECK(estimate_red(s, conf(s, "C")) == ctx(s, {"S1", "M1"}));
}

TEST_CASE("truncated exploration never claims equivalence of distinct configurations") {
    const BpaSystem s = load_system(data_path("inflating.bpa"));
    for (std::size_t cap : {3, 5, 8}) {
        OracleParams p;
        p.len_cap = cap;
        const OracleAnswer a = approximant_check(s, conf(s, "X"), conf(s, "X X"), p);
        CHECK(a.value != Tri::Yes);
        CHECK(a.tainted > 0);
        if (a.value == Tri::No) {
            CHECK(verify_refutation(s, *a.refutation, p.tau_cap));
        }
    }
}

TEST_CASE("class changes along explored paths") {
    const BpaSystem s = load_system(data_path("example1.bpa"));
    const OracleSession session(s, {conf(s, "C"), conf(s, "S1 M12"), conf(s, "M12 S1")});
    CHECK(session.class_changes(conf(s, "C"), {}) == 3);
    CHECK(session.class_changes(conf(s, "S1 M12"), {}) == 1);
    CHECK(session.class_changes(conf(s, "M12 S1"), {}) == 2);
}
