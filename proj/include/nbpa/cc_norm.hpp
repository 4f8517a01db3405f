#pragma once

#include "nbpa/base.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace nbpa {

inline constexpr std::uint64_t kInfiniteCc = std::numeric_limits<std::uint64_t>::max();

/// Class-change norms ‖X‖_R relative to a base: the fewest ≡B-class
/// changes on a path from Xγ to γ, for red(γ) = R.
struct CcNormTable {
    std::vector<std::vector<std::uint64_t>> value; ///< [context][variable]
    bool converged = false;
    std::size_t iterations = 0;

    std::uint64_t at(ContextId c, Var x) const { return value.at(c).at(x); }
};

/// Value iteration from +∞.  When the iteration cap is hit the table comes
/// back with converged = false rather than looping.  Throws Error if a pd
/// evaluation fails (the base did not pass check_base).
CcNormTable cc_norm_table(const BpaSystem& system, const Base& base, const NormTable& norms);

/// Sum of the table entries along the configuration, each symbol read in
/// the context left by its suffix.  Throws Error on an unconverged table.
std::uint64_t cc_norm(const Base& base, const CcNormTable& table, ContextId ctx,
                      std::span<const Var> config);

} // namespace nbpa
