#include "nbpa/cc_norm.hpp"

#include <algorithm>

namespace nbpa {

namespace {

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
    return a > kInfiniteCc - b ? kInfiniteCc : a + b;
}

// One rule read in one context: contexts seen by each body symbol and
// whether the step leaves the ≡B class of the head.
struct Step {
    std::vector<ContextId> ctx;
    std::uint64_t change = 0;
};

} // namespace

CcNormTable cc_norm_table(const BpaSystem& system, const Base& base, const NormTable& norms) {
    const std::size_t nctx = base.context_count();
    const std::size_t nvars = system.variable_count();
    CcNormTable table;
    table.value.assign(nctx, std::vector<std::uint64_t>(nvars, kInfiniteCc));

    // steps[c][r] for rule r in context c
    std::vector<std::vector<Step>> steps(nctx, std::vector<Step>(system.rules().size()));
    for (ContextId c = 0; c < nctx; ++c) {
        for (Var x = 0; x < nvars; ++x) {
            if (base.context(c).contains(x)) {
                table.value[c][x] = 0;
            }
        }
        for (std::size_t ri = 0; ri < system.rules().size(); ++ri) {
            const Rule& rule = system.rules()[ri];
            Step& step = steps[c][ri];
            step.ctx.resize(rule.body.size());
            ContextId cur = c;
            for (std::size_t i = rule.body.size(); i-- > 0;) {
                step.ctx[i] = cur;
                cur = red_context(base, cur, std::span<const Var>(&rule.body[i], 1));
            }
            const Var head = rule.head;
            step.change = pd_image(base, c, rule.body) ==
                                  pd_image(base, c, std::span<const Var>(&head, 1))
                              ? 0
                              : 1;
        }
    }

    Norm max_norm = 1;
    for (Var x = 0; x < nvars; ++x) {
        max_norm = std::max(max_norm, norms[x]);
    }
    const std::size_t cap = nvars * std::max<std::size_t>(nctx, 1) * max_norm + 1;

    bool changed = true;
    while (changed && table.iterations < cap) {
        changed = false;
        ++table.iterations;
        for (ContextId c = 0; c < nctx; ++c) {
            for (Var x = 0; x < nvars; ++x) {
                if (base.context(c).contains(x)) {
                    continue;
                }
                std::uint64_t best = table.value[c][x];
                for (std::size_t ri : system.rules_of(x)) {
                    const Rule& rule = system.rules()[ri];
                    const Step& step = steps[c][ri];
                    std::uint64_t total = step.change;
                    for (std::size_t i = 0; i < rule.body.size() && total != kInfiniteCc; ++i) {
                        total = saturating_add(total, table.value[step.ctx[i]][rule.body[i]]);
                    }
                    best = std::min(best, total);
                }
                if (best < table.value[c][x]) {
                    table.value[c][x] = best;
                    changed = true;
                }
            }
        }
    }
    table.converged = !changed;
    return table;
}

std::uint64_t cc_norm(const Base& base, const CcNormTable& table, ContextId ctx,
                      std::span<const Var> config) {
    if (!table.converged) {
        throw Error("cc-norm table did not converge");
    }
    std::uint64_t total = 0;
    ContextId cur = ctx;
    for (auto it = config.rbegin(); it != config.rend(); ++it) {
        total = saturating_add(total, table.at(cur, *it));
        cur = red_context(base, cur, std::span<const Var>(&*it, 1));
    }
    return total;
}

} // namespace nbpa
