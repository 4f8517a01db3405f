#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nbpa/cc_norm.hpp"
#include "support.hpp"

using namespace test_support;

namespace {

// Fewest class changes from α to ε by 0-1 breadth-first search over
// configurations, classes told apart by pd in context c.  Configurations
// longer than max_len are not entered, so this is an upper bound.
std::uint64_t reference_cc(const BpaSystem& s, const Base& b, ContextId c, const Configuration& alpha,
                           std::size_t max_len) {
    std::map<Configuration, std::uint64_t> dist{{alpha, 0}};
    std::deque<Configuration> queue{alpha};
    while (!queue.empty()) {
        const Configuration u = queue.front();
        queue.pop_front();
        const std::uint64_t d = dist[u];
        if (u.empty()) {
            return d;
        }
        const Configuration from = pd_image(b, c, u);
        for (const Transition& t : transitions(s, u)) {
            if (t.target.size() > max_len) {
                continue;
            }
            const std::uint64_t w = pd_image(b, c, t.target) == from ? 0 : 1;
            auto it = dist.find(t.target);
            if (it == dist.end() || it->second > d + w) {
                dist[t.target] = d + w;
                if (w == 0) {
                    queue.push_front(t.target);
                } else {
                    queue.push_back(t.target);
                }
            }
        }
    }
    return kInfiniteCc;
}

struct Tabled {
    BpaSystem s;
    NormTable norms;
    std::optional<Base> base;
    CcNormTable table;

    explicit Tabled(BpaSystem system) : s(std::move(system)), norms(compute_norms(s)) {
        const auto pre = certified_base(s, norms);
        REQUIRE(pre);
        base.emplace(s.variable_count(), norms, *pre);
        table = cc_norm_table(s, *base, norms);
        REQUIRE(table.converged);
    }

    std::uint64_t cc(const ContextSet& r, const std::string& config) const {
        return cc_norm(*base, table, *base->find_context(r), conf(s, config));
    }
};

} // namespace

TEST_CASE("class-change norms of example 1") {
    const Tabled t(load_system(data_path("example1.bpa")));
    const ContextSet empty(t.s.variable_count());
    CHECK(t.cc(empty, "S1 M12") == 1);
    CHECK(t.cc(empty, "M12 S1") == 2);
    CHECK(t.cc(empty, "C") == 3);
    const ContextSet m2 = red_of(*t.base, empty, conf(t.s, "M2"));
    const ContextSet m23 = red_of(*t.base, empty, conf(t.s, "M23"));
    CHECK(t.cc(m2, "C") == 2);
    CHECK(t.cc(m23, "C") == 1);
    for (const char* c : {"S1 M12", "M12 S1", "C", "S2 C M23"}) {
        CHECK(t.cc(empty, c) == reference_cc(t.s, *t.base, 0, conf(t.s, c), 8));
    }
}

TEST_CASE("A B changes class once in two steps") {
    const SilentElimination e = eliminate_silent_variables(load_system(data_path("witness_path.bpa")));
    const Tabled t(e.system);
    const ContextSet empty(t.s.variable_count());
    CHECK(t.cc(empty, "A B") == 1);
    CHECK(t.norms.of(conf(t.s, "A B")) == 2);
}

TEST_CASE("class-change norms of the XY system") {
    const Tabled t(load_system(data_path("xy.bpa")));
    const ContextSet empty(t.s.variable_count());
    CHECK(t.cc(empty, "Y") == 1);
    CHECK(t.cc(empty, "X") == 2);
    CHECK(render(t.s, pd(*t.base, empty, conf(t.s, "X"))) == "X Y");
}

TEST_CASE("table values match the path search on random systems") {
    std::mt19937 rng(99);
    int compared = 0;
    for (int i = 0; i < 120; ++i) {
        const BpaSystem s = random_system(rng);
        const NormTable norms = compute_norms(s);
        const auto pre = certified_base(s, norms);
        if (!pre) {
            continue;
        }
        const Base b(s.variable_count(), norms, *pre);
        const CcNormTable table = cc_norm_table(s, b, norms);
        REQUIRE(table.converged);
        for (ContextId c = 0; c < b.context_count(); ++c) {
            for (int k = 0; k < 3; ++k) {
                const Configuration g = random_config(rng, s.variable_count(), 3);
                CAPTURE(serialize_system(s));
                CAPTURE(render(s, g));
                CHECK(cc_norm(b, table, c, g) == reference_cc(s, b, c, g, g.size() + 6));
                ++compared;
            }
        }
    }
    CHECK(compared > 300);
}
