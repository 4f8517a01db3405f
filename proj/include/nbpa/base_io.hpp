#pragma once

#include "nbpa/base.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nbpa {

/// Comma-separated variable names; "" is the empty set.
ContextSet parse_context(const BpaSystem& system, std::string_view text);

nlohmann::json context_to_json(const BpaSystem& system, const ContextSet& ctx);
nlohmann::json config_to_json(const BpaSystem& system, std::span<const Var> config);

/// The certificate file payload.  Propagation triples sharing prime and
/// context are grouped into one record.
nlohmann::json base_to_json(const BpaSystem& system, const PreBase& base);

/// Throws Error on unknown names or a malformed document.
PreBase base_from_json(const BpaSystem& system, const nlohmann::json& doc);

/// The optional "variables" field: the subsystem the certificate was
/// issued for.
std::optional<std::vector<std::string>> certificate_variables(const nlohmann::json& doc);

PreBase load_base(const BpaSystem& system, const std::string& path);

} // namespace nbpa
