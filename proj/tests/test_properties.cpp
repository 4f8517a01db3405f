#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "suites.hpp"

using namespace test_support;

namespace {

void require_clean(const Tally& t, long min_cases) {
    CAPTURE(t.first_failure);
    CHECK(t.failures == 0);
    CHECK(t.cases >= min_cases);
}

} // namespace

TEST_CASE("pd is idempotent") { require_clean(pd_idempotence(), 500); }

TEST_CASE("pd is a homomorphism") { require_clean(pd_homomorphism(), 500); }

TEST_CASE("cc-norm is additive") { require_clean(cc_additivity(), 500); }

TEST_CASE("cc-norm is bounded by the norm") { require_clean(cc_below_norm(), 500); }

TEST_CASE("cc-norm vanishes exactly on the context") { require_clean(cc_zero_on_context(), 500); }

TEST_CASE("equal images have equal legal moves") { require_clean(lm_transfer(), 500); }

TEST_CASE("related configurations answer each other's moves") {
    const Tally t = game_property();
    require_clean(t, 100 * 500);
}

TEST_CASE("the exact closure agrees with the capped one on certified bases") {
    ClosureCaps summary;
    summary.mode = ClosureMode::Summary;
    for (const Member& m : family()) {
        CHECK(check_consistency(m.s, *m.base, summary).verdict == PairVerdict::Consistent);
    }
}
