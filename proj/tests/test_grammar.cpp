#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

using namespace test_support;

TEST_CASE("example 1 parses with declared order") {
    const BpaSystem s = load_system(data_path("example1.bpa"));
    CHECK(s.variable_count() == 13);
    CHECK(s.var_name(0) == "S1");
    CHECK(s.var_name(12) == "C");
    CHECK(s.action_count() == 4);
    CHECK(s.is_silent(*s.find_action("tau")));
    CHECK_FALSE(s.is_silent(*s.find_action("a1")));
    CHECK(s.rules_of(*s.find_variable("C")).size() == 2);
}

TEST_CASE("norms of example 1") {
    const BpaSystem s = load_system(data_path("example1.bpa"));
    const NormTable n = compute_norms(s);
    for (const char* v : {"S1", "S2", "S3", "M1", "M2", "M3", "M12", "M13", "M23", "M123"}) {
        CHECK(n[*s.find_variable(v)] == 1);
    }
    for (const char* v : {"A", "B", "C"}) {
        CHECK(n[*s.find_variable(v)] == 3);
    }
    CHECK(n.of(conf(s, "S2 C M23")) == 5);
    // against shortest paths found by brute force
    for (Var v = 0; v < s.variable_count(); ++v) {
        CHECK(n[v] == reference_norm(s, {v}));
    }
}

TEST_CASE("the literal variable set is not normed") {
    const BpaSystem s = load_system(data_path("example1_literal.bpa"));
    const NormednessReport r = check_normed(s);
    CHECK_FALSE(r.normed);
    REQUIRE(r.unnormed.size() == 1);
    CHECK(s.var_name(r.unnormed[0]) == "D");
    CHECK_THROWS_AS(compute_norms(s), Error);
}

TEST_CASE("parse errors carry positions") {
    CHECK_THROWS_AS(parse_system("X -a->"), ParseError);
    CHECK_THROWS_AS(parse_system("vars X\nX -a-> Y\n"), ParseError);
    try {
        parse_system("X -a-> .\nX a .\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("auto-declaration and comments") {
    const BpaSystem s = parse_system("# c\nY -a-> X Y # trailing\nX -tau-> .\nY -b-> .\n");
    CHECK(s.variable_count() == 2);
    CHECK(s.var_name(0) == "Y");
    CHECK(s.rules()[0].body == Configuration{1, 0});
}

TEST_CASE("serialization round-trips") {
    const BpaSystem s = load_system(data_path("example1.bpa"));
    CHECK(parse_system(serialize_system(s)) == s);
    std::mt19937 rng(7);
    for (int i = 0; i < 50; ++i) {
        const BpaSystem r = random_system(rng);
        CHECK(parse_system(serialize_system(r)) == r);
    }
}

TEST_CASE("configurations") {
    const BpaSystem s = load_system(data_path("example1.bpa"));
    CHECK(conf(s, ".").empty());
    CHECK(conf(s, "  ").empty());
    CHECK(render(s, conf(s, "S2  C M23")) == "S2 C M23");
    CHECK(render(s, {}) == ".");
    CHECK_THROWS_AS(conf(s, "S2 D"), Error);
}

TEST_CASE("transitions rewrite the leftmost variable") {
    const BpaSystem s = load_system(data_path("example1.bpa"));
    const auto ts = transitions(s, conf(s, "C M23"));
    REQUIRE(ts.size() == 2);
    CHECK(render(s, ts[0].target) == "C M23");
    CHECK(render(s, ts[1].target) == "M3 M2 M23");
    CHECK(transitions(s, {}).empty());
}

TEST_CASE("silent variables are detected and erased") {
    const BpaSystem s = load_system(data_path("witness_path.bpa"));
    const auto silent = detect_silent_variables(s);
    REQUIRE(silent.size() == 1);
    CHECK(s.var_name(silent[0]) == "A'");
    const SilentElimination e = eliminate_silent_variables(s);
    CHECK(e.system.variable_count() == 2);
    CHECK(render(e.system, e.translate(conf(s, "A' A B"))) == "A B");
    // A -tau-> A' becomes A -tau-> .
    const Var a = *e.system.find_variable("A");
    bool found = false;
    for (std::size_t ri : e.system.rules_of(a)) {
        const Rule& r = e.system.rules()[ri];
        found = found || (e.system.is_silent(r.label) && r.body.empty());
    }
    CHECK(found);
}

TEST_CASE("restriction keeps reachable variables only") {
    const BpaSystem s = load_system(data_path("example1.bpa"));
    const Restriction r = restrict_to(s, conf(s, "M23 M3 M2"));
    CHECK(r.system.variable_count() == 3);
    CHECK(render(r.system, r.translate(conf(s, "M3 M2"))) == "M3 M2");
    const Restriction c = restrict_to(s, conf(s, "C"));
    // C reaches M3 and M2 only
    CHECK(c.system.variable_count() == 3);
    const std::vector<std::string> bad{"C"};
    CHECK_THROWS_AS(restrict_to_names(s, bad), Error);
}
