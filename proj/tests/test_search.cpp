#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "suites.hpp"

using namespace test_support;

namespace {

Verdict decide(const BpaSystem& s, const std::string& l, const std::string& r, DecideParams p = {}) {
    return decide_equivalence(s, conf(s, l), conf(s, r), p);
}

} // namespace

TEST_CASE("equivalences of example 1 come with certificates") {
    const BpaSystem s = load_system(data_path("example1.bpa"));
    for (const auto& [l, r] : std::vector<std::pair<const char*, const char*>>{
             {"S2 M23", "M23"}, {"M23", "M3 M23"}, {"S2 M23", "M3 M23"}, {"S1 M12", "M12"}}) {
        const Verdict v = decide(s, l, r);
        REQUIRE(v.status == Status::Equivalent);
        REQUIRE(v.certificate);
        // the certificate is checked again on its own subsystem
        const NormTable norms = compute_norms(v.system);
        const Configuration lt = parse_configuration(v.system, l);
        const Configuration rt = parse_configuration(v.system, r);
        CHECK(verify_certificate(v.system, norms, *v.certificate, {}, {{lt, rt}}).ok);
        // and independently by the oracle
        CHECK(approximant_check(s, conf(s, l), conf(s, r)).value == Tri::Yes);
    }
}

TEST_CASE("inequivalences of example 1") {
    const BpaSystem s = load_system(data_path("example1.bpa"));
    const Verdict a = decide(s, "M23", "M3 M2");
    CHECK(a.status == Status::Inequivalent);
    const Verdict b = decide(s, "S1 M12", "M12 S1");
    CHECK(b.status == Status::Inequivalent);
    // both are small enough for the search to rule out every base
    DecideParams ex;
    ex.strategy = Strategy::Exhaustive;
    ex.oracle_refutation = false;
    CHECK(decide(s, "M23", "M3 M2", ex).status == Status::Inequivalent);
    CHECK(decide(s, "S1 M12", "M12 S1", ex).status == Status::Inequivalent);
}

TEST_CASE("the guided strategy alone never claims inequivalence") {
    const BpaSystem s = load_system(data_path("example1.bpa"));
    DecideParams g;
    g.strategy = Strategy::Guided;
    CHECK(decide(s, "M23", "M3 M2", g).status == Status::Unknown);
    CHECK(decide(s, "S2 M23", "M23", g).status == Status::Equivalent);
}

TEST_CASE("proposed bases lie in the search space") {
    for (const char* file : {"example1.bpa", "xy.bpa", "irregular.bpa"}) {
        const BpaSystem s = load_system(data_path(file));
        const NormTable norms = compute_norms(s);
        const ProposeResult p = propose_base(s, norms);
        REQUIRE(p.usable);
        CHECK(in_search_space(s, norms, p.base));
    }
    // a base outside the ordered candidates is not
    const BpaSystem s = load_system(data_path("example1.bpa"));
    const NormTable norms = compute_norms(s);
    PreBase b = propose_base(s, norms).base;
    b.domain.push_back(ctx(s, {"B"}));
    CHECK_FALSE(in_search_space(s, norms, b));
}

TEST_CASE("the search finds a base for the XY system from nothing") {
    const BpaSystem s = load_system(data_path("xy.bpa"));
    const NormTable norms = compute_norms(s);
    const SearchOutcome out = search_bases(s, norms, {});
    REQUIRE(out.base);
    CHECK(verify_certificate(s, norms, *out.base, {}, {}).ok);
}

TEST_CASE("parallel search reaches the same verdicts") {
    const BpaSystem s = load_system(data_path("example1.bpa"));
    DecideParams p;
    p.strategy = Strategy::Exhaustive;
    p.oracle_refutation = false;
    p.bounds.jobs = 2;
    CHECK(decide(s, "M23", "M3 M2", p).status == Status::Inequivalent);
    CHECK(decide(s, "S2 M23", "M23", p).status == Status::Equivalent);
}

TEST_CASE("budgets stop the search without a verdict") {
    const BpaSystem s = load_system(data_path("example1.bpa"));
    DecideParams p;
    p.strategy = Strategy::Exhaustive;
    p.oracle_refutation = false;
    p.bounds.max_nodes = 5;
    const Verdict v = decide(s, "A", "C", p);
    CHECK(v.status == Status::Unknown);
    CHECK(v.stats.budget_exhausted);
    const nlohmann::json doc = verdict_to_json(v, p);
    CHECK(doc["status"] == "unknown");
    CHECK(doc["budgets"]["budget_exhausted"] == true);
    CHECK_FALSE(doc.contains("seconds"));
}

TEST_CASE("strategy names") {
    CHECK(parse_strategy("auto") == Strategy::Auto);
    CHECK(parse_strategy("guided") == Strategy::Guided);
    CHECK(parse_strategy("exhaustive") == Strategy::Exhaustive);
    CHECK_THROWS_AS(parse_strategy("fast"), Error);
}

TEST_CASE("exhaustive decisions and the oracle never contradict each other") {
    const Tally t = search_oracle_agreement();
    CAPTURE(t.first_failure);
    CHECK(t.failures == 0);
    // the comparison is not vacuous
    CHECK(t.cases >= 100);
}
