#pragma once

#include "nbpa/base.hpp"
#include "nbpa/oracle.hpp"

#include <string>

namespace nbpa {

struct ProposeParams {
    OracleParams oracle;
    /// Longest prefix β tried in a decomposition candidate β·B.
    std::size_t max_prefix = 3;
    /// Candidates examined per (variable, context) before giving up on it.
    std::size_t max_candidates = 4000;
    std::size_t max_contexts = 256;
};

struct ProposeResult {
    PreBase base;
    bool usable = true;
    std::string note; ///< why the candidate is unusable, if it is
};

/// Builds a candidate for the intended base from oracle answers: contexts
/// are estimated redundancy sets of representative suffixes, primes the
/// declaration-least members of classes that do not decompose, and
/// decomposition bodies the first equivalent β·B found (normalized through
/// the assembled candidate).  Nothing here is trusted: the result still
/// has to pass check_pre_base, check_base and check_consistency.
ProposeResult propose_base(const BpaSystem& system, const NormTable& norms,
                           const ProposeParams& params = {});

} // namespace nbpa
