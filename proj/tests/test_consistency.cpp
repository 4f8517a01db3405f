#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nbpa/base_io.hpp"
#include "nbpa/regularity.hpp"
#include "support.hpp"

#include <chrono>

using namespace test_support;

namespace {

struct Certified {
    BpaSystem s;
    NormTable norms;
    PreBase pre;

    explicit Certified(const std::string& file)
        : s(load_system(data_path(file))), norms(compute_norms(s)) {
        const ProposeResult p = propose_base(s, norms);
        REQUIRE(p.usable);
        pre = p.base;
    }
};

// Legal moves from the definition: (τ, pd α) itself, then every move from
// a state reached by τ-steps that keep the pd image.
std::set<Outcome> reference_moves(const BpaSystem& s, const BaseView& b, ContextId c,
                                  const Configuration& alpha) {
    const Configuration from = pd_image(b, c, alpha);
    std::set<Configuration> seen{alpha};
    std::deque<Configuration> queue{alpha};
    std::set<Outcome> out{Outcome{*s.find_action("tau"), from}};
    while (!queue.empty()) {
        const Configuration u = queue.front();
        queue.pop_front();
        for (const Transition& t : transitions(s, u)) {
            const Configuration img = pd_image(b, c, t.target);
            if (s.is_silent(t.label) && img == from && seen.insert(t.target).second) {
                queue.push_back(t.target);
            }
            out.insert(Outcome{t.label, img});
        }
    }
    return out;
}

} // namespace

TEST_CASE("the example 1 base is consistent in both closure modes") {
    const Certified e("example1.bpa");
    const Base b(e.s.variable_count(), e.norms, e.pre);
    const auto start = std::chrono::steady_clock::now();
    const ConsistencyReport capped = check_consistency(e.s, b);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(capped.verdict == PairVerdict::Consistent);
    CHECK(capped.failures.empty());
    CHECK(capped.checked == e.pre.dec.size() + e.pre.prop.size());
    CHECK(seconds < 60.0);
    ClosureCaps summary;
    summary.mode = ClosureMode::Summary;
    CHECK(check_consistency(e.s, b, summary).verdict == PairVerdict::Consistent);
}

TEST_CASE("legal moves of C") {
    const Certified e("example1.bpa");
    const Base b(e.s.variable_count(), e.norms, e.pre);
    const LegalMoves lm = legal_moves(e.s, b, 0, conf(e.s, "C"));
    CHECK_FALSE(lm.truncated);
    const std::vector<Outcome> expected{
        Outcome{*e.s.find_action("a1"), conf(e.s, "M1 M3 M2")},
        Outcome{*e.s.find_action("tau"), conf(e.s, "M1 M3 M2")},
        Outcome{*e.s.find_action("tau"), conf(e.s, "M3 M2")},
    };
    CHECK(lm.outcomes == expected);
    CHECK(render_outcome(e.s, lm.outcomes[0]) == "(a1, M1 M3 M2)");
}

TEST_CASE("the τ-closure stays inside the class") {
    const Certified e("example1.bpa");
    const Base b(e.s.variable_count(), e.norms, e.pre);
    const ClosureResult c = tau_closure(e.s, b, 0, conf(e.s, "S2 M23"));
    CHECK_FALSE(c.truncated);
    std::set<std::string> members;
    for (const Configuration& m : c.members) {
        members.insert(render(e.s, m));
    }
    CHECK(members == std::set<std::string>{"S2 M23", "M23"});
}

TEST_CASE("legal moves agree with the definition in every mode") {
    const Certified e("example1.bpa");
    const Base b(e.s.variable_count(), e.norms, e.pre);
    ClosureCaps summary;
    summary.mode = ClosureMode::Summary;
    std::mt19937 rng(5);
    for (ContextId c = 0; c < b.context_count(); ++c) {
        for (int i = 0; i < 15; ++i) {
            const Configuration g = random_config(rng, e.s.variable_count(), 3);
            const std::set<Outcome> ref = reference_moves(e.s, b, c, g);
            const LegalMoves capped = legal_moves(e.s, b, c, g);
            const LegalMoves exact = legal_moves(e.s, b, c, g, summary);
            REQUIRE_FALSE(capped.truncated);
            CHECK(std::set<Outcome>(capped.outcomes.begin(), capped.outcomes.end()) == ref);
            CHECK(std::set<Outcome>(exact.outcomes.begin(), exact.outcomes.end()) == ref);
        }
    }
}

TEST_CASE("decomposing A as S1 M2 is inconsistent") {
    const Certified e("example1.bpa");
    const Var a = *e.s.find_variable("A");
    const ContextSet empty(e.s.variable_count());
    PreBase wrong = e.pre;
    for (DecTriple& d : wrong.dec) {
        if (d.var == a && d.context == empty) {
            d.body = conf(e.s, "S1 M2");
        }
    }
    REQUIRE(check_pre_base(e.s, wrong).empty());
    const Base b(e.s.variable_count(), e.norms, wrong);
    const ConsistencyReport r = check_consistency(e.s, b);
    CHECK(r.verdict == PairVerdict::Inconsistent);
    bool found = false;
    for (const TripleReport& t : r.failures) {
        if (!t.propagation && t.var == a && t.context == 0) {
            found = true;
            CHECK(t.pair.verdict == PairVerdict::Inconsistent);
            CHECK_FALSE(t.pair.pd_differs);
            // A's τ-step to S1 M3 has no counterpart from S1 M2
            const Outcome step{*e.s.find_action("tau"), conf(e.s, "S1 M3")};
            CHECK(std::find(t.pair.missing.begin(), t.pair.missing.end(), step) !=
                  t.pair.missing.end());
            CHECK_FALSE(t.pair.extra.empty());
        }
    }
    CHECK(found);
    CHECK(render_report(e.s, b, r).find("inconsistent") != std::string::npos);
}

TEST_CASE("propagation pairs") {
    const Certified e("example1.bpa");
    const Base b(e.s.variable_count(), e.norms, e.pre);
    const Var m3 = *e.s.find_variable("M3");
    const Configuration s3m3 = conf(e.s, "S3 M3");
    CHECK(consistent_pair(e.s, b, 0, m3, s3m3).verdict == PairVerdict::Consistent);
    const Configuration s1m3 = conf(e.s, "S1 M3");
    const PairReport r = consistent_pair(e.s, b, 0, m3, s1m3);
    CHECK(r.verdict == PairVerdict::Inconsistent);
    CHECK(r.pd_differs);
}

TEST_CASE("truncated closures make verdicts indeterminate, never positive") {
    // X -tau-> X X inflates every τ-closure; claiming X ∈ red(X) needs the
    // closure of X X, which the caps cut off.
    const BpaSystem s = load_system(data_path("inflating.bpa"));
    const NormTable norms = compute_norms(s);
    const ContextSet empty(1);
    ContextSet full(1);
    full.insert(0);
    PreBase pb;
    pb.domain = {empty, full};
    pb.primes = {{empty, {0}}, {full, {}}};
    pb.prop = {PropTriple{0, 0, empty}};
    REQUIRE(check_pre_base(s, pb).empty());
    const Base b(1, norms, pb);
    REQUIRE(check_base(s, b).empty());

    const ConsistencyReport capped = check_consistency(s, b);
    CHECK(capped.verdict == PairVerdict::Indeterminate);
    REQUIRE(capped.failures.size() == 1);
    CHECK((capped.failures[0].pair.left_truncated || capped.failures[0].pair.right_truncated));
    const nlohmann::json doc = report_to_json(s, b, capped);
    CHECK(doc.dump().find("\"truncated\":true") != std::string::npos);

    // The exact closure settles it: X X cannot do a to ε.
    ClosureCaps summary;
    summary.mode = ClosureMode::Summary;
    CHECK(check_consistency(s, b, summary).verdict == PairVerdict::Inconsistent);

    // Nothing definite comes out of the default pipeline.
    const Verdict v = decide_equivalence(s, conf(s, "X"), conf(s, "X X"));
    CHECK(v.status == Status::Unknown);
    CHECK(v.stats.indeterminate > 0);
    CHECK(decide_regularity(s, conf(s, "X")).status == Regularity::Unknown);
}

TEST_CASE("with the exact closure the inflating system is decided") {
    const BpaSystem s = load_system(data_path("inflating.bpa"));
    DecideParams p;
    p.bounds.caps.mode = ClosureMode::Summary;
    CHECK(decide_equivalence(s, conf(s, "X"), conf(s, "X X"), p).status == Status::Inequivalent);
    CHECK(decide_regularity(s, conf(s, "X"), p).status == Regularity::Irregular);
}
